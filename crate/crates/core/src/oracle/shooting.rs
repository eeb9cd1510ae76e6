use super::EigenResult;
use crate::builtin::J0_FIRST_ZERO;
use crate::error::{Error, Result};
use crate::geometry::{AreaFunction, RiemannianModel};
use crate::grid::RadialGrid;

const BRACKET_LOW: f64 = 1e-6;
const MAX_DOUBLINGS: usize = 60;

// 4-point Gauss–Legendre nodes and weights on [-1, 1].
const GAUSS_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS_W: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// Radial Dirichlet problem `(A f')' + λ A f = 0`, `f'(0) = 0`, `f(R) = 0`,
/// integrated as the first-order system in `(f, A f')` with RK4 on the grid.
struct RadialShooter {
    dim: f64,
    h: f64,
    /// `A` at the nodes, midpoints `t_i + h/2`, and the Gauss points of `[0, h]`.
    nodes: Vec<f64>,
    mids: Vec<f64>,
    first_cell: [(f64, f64); 4],
}

impl RadialShooter {
    fn new(area: &AreaFunction, grid: &RadialGrid) -> Result<Self> {
        let h = grid.spacing();
        let nodes = area.samples(grid)?;
        let mids = grid.nodes()[..grid.intervals()]
            .iter()
            .map(|&t| area.eval(t + 0.5 * h))
            .collect::<Result<Vec<_>>>()?;
        if let Some(a) = mids.iter().find(|&&a| !(a > 0.0)) {
            return Err(Error::InvalidModel(format!(
                "sphere area {a} is not positive inside the ball"
            )));
        }
        let mut first_cell = [(0.0, 0.0); 4];
        for (slot, (x, w)) in first_cell.iter_mut().zip(GAUSS_X.iter().zip(GAUSS_W)) {
            let s = 0.5 * h * (1.0 + x);
            *slot = (s, 0.5 * h * w * area.eval(s)?);
        }
        Ok(Self {
            dim: area.dimension() as f64,
            h,
            nodes,
            mids,
            first_cell,
        })
    }

    /// `f` at every node for the trial value `lambda`, normalized to `f(0) = 1`.
    fn integrate(&self, lambda: f64) -> Vec<f64> {
        let n = self.nodes.len();
        let h = self.h;
        let series = |t: f64| 1.0 - lambda * t * t / (2.0 * self.dim);
        let mut f = vec![0.0; n];
        f[0] = 1.0;
        f[1] = series(h);
        let mut p = -lambda * self.first_cell.iter().map(|&(s, wa)| wa * series(s)).sum::<f64>();
        for i in 1..n - 1 {
            let (a0, am, a1) = (self.nodes[i], self.mids[i], self.nodes[i + 1]);
            let y = f[i];
            let k1f = p / a0;
            let k1p = -lambda * a0 * y;
            let k2f = (p + 0.5 * h * k1p) / am;
            let k2p = -lambda * am * (y + 0.5 * h * k1f);
            let k3f = (p + 0.5 * h * k2p) / am;
            let k3p = -lambda * am * (y + 0.5 * h * k2f);
            let k4f = (p + h * k3p) / a1;
            let k4p = -lambda * a1 * (y + h * k3f);
            f[i + 1] = y + h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
            p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        }
        f
    }

    /// True once `lambda ≥ λ₁`: the solution reaches zero inside `(0, R]`.
    fn at_or_above(&self, lambda: f64) -> bool {
        self.integrate(lambda)[1..].iter().any(|&v| v <= 0.0)
    }
}

/// First Dirichlet eigenvalue of a rotationally symmetric ball by shooting
/// from the center and bisecting on the sign of `f(R)` to width `tol`.
pub fn shoot_radial_lambda1(model: &RiemannianModel, grid: &RadialGrid, tol: f64) -> Result<EigenResult> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    for &t in &grid.nodes()[1..] {
        let w = model.warping().eval(t)?;
        if !(w > 0.0) {
            return Err(Error::InvalidModel(format!("ω({t}) = {w} is not positive")));
        }
    }
    let area = model.area()?;
    shoot_area(&area, grid, tol)
}

/// Same as [`shoot_radial_lambda1`] for the model with area function `area`.
pub fn shoot_area(area: &AreaFunction, grid: &RadialGrid, tol: f64) -> Result<EigenResult> {
    let shooter = RadialShooter::new(area, grid)?;
    let r = grid.radius();
    let mut lo = BRACKET_LOW;
    let mut hi = 4.0 * shooter.dim * J0_FIRST_ZERO * J0_FIRST_ZERO / (r * r);
    if shooter.at_or_above(lo) {
        return Err(Error::Bracket {
            lo,
            hi,
            detail: "solution already vanishes at the lower end".into(),
        });
    }
    let mut doublings = 0;
    while !shooter.at_or_above(hi) {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::Bracket {
                lo,
                hi,
                detail: "no sign change of f(R) after repeated doubling".into(),
            });
        }
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if shooter.at_or_above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    let lambda1 = 0.5 * (lo + hi);
    let mut f = shooter.integrate(lambda1);
    let peak = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let residual = f.last().unwrap().abs() / peak;
    *f.last_mut().unwrap() = 0.0;
    Ok(EigenResult {
        lambda1,
        eigenfunction: f,
        iterations,
        residual,
    })
}
