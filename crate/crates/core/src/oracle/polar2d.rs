use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Serialize;

use super::banded::SymBand;
use super::EigenResult;
use crate::error::{Error, Result};
use crate::geometry::{area_from_polar_metric, PolarMetric2D};
use crate::grid::RadialGrid;

const MAX_ITERATIONS: usize = 1000;
const ASYMMETRY_LIMIT: f64 = 1e-10;

/// Polar mesh of the ball: `radial` intervals of width `R/radial` (interior
/// rings at `r_i = i·h`, Dirichlet ring at `R` excluded), `angular` uniform
/// angles, and one center unknown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mesh2D {
    radius: f64,
    radial: usize,
    angular: usize,
}

impl Mesh2D {
    pub const MIN_RADIAL: usize = 16;
    pub const MIN_ANGULAR: usize = 16;

    pub fn new(radius: f64, radial: usize, angular: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        if radial < Self::MIN_RADIAL {
            return Err(Error::InvalidGrid(format!(
                "need at least {} radial intervals, got {radial}",
                Self::MIN_RADIAL
            )));
        }
        if angular < Self::MIN_ANGULAR || !angular.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "angular count must be even and at least {}, got {angular}",
                Self::MIN_ANGULAR
            )));
        }
        Ok(Self {
            radius,
            radial,
            angular,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn radial(&self) -> usize {
        self.radial
    }

    pub fn angular(&self) -> usize {
        self.angular
    }

    pub fn spacing(&self) -> f64 {
        self.radius / self.radial as f64
    }

    /// Number of unknowns: the center plus `(radial - 1) · angular` ring nodes.
    pub fn unknowns(&self) -> usize {
        1 + (self.radial - 1) * self.angular
    }

    /// The mesh with both resolutions doubled.
    pub fn refined(&self) -> Self {
        Self {
            radius: self.radius,
            radial: 2 * self.radial,
            angular: 2 * self.angular,
        }
    }

    fn index(&self, ring: usize, j: usize) -> usize {
        1 + (ring - 1) * self.angular + j
    }
}

/// A mesh result paired with its refinement and a Richardson estimate of
/// the discretization error of the finer value (second-order scheme).
#[derive(Debug, Clone, Serialize)]
pub struct MeshStudy {
    pub coarse: EigenResult,
    pub fine: EigenResult,
    pub richardson: f64,
    pub extrapolated: f64,
}

impl MeshStudy {
    pub fn lambda1(&self) -> f64 {
        self.fine.lambda1
    }
}

struct Assembly {
    rows: Vec<Vec<(usize, f64)>>,
    diag: Vec<f64>,
    mass: Vec<f64>,
}

fn assemble(metric: &PolarMetric2D, mesh: &Mesh2D) -> Result<Assembly> {
    let m = mesh.radial;
    let p = mesh.angular;
    let h = mesh.spacing();
    let dth = TAU / p as f64;
    let theta = |j: usize| j as f64 * dth;
    // Radial face between ring k and k+1 (ring 0 is the center, ring m the boundary).
    let radial_face =
        |k: usize, j: usize| -> Result<f64> { Ok(metric.density((2 * k + 1) as f64 * h / 2.0, theta(j))? * dth / h) };
    let angular_face = |i: usize, j: usize| -> Result<f64> {
        let rho = metric.density(i as f64 * h, (2 * j + 1) as f64 * dth / 2.0)?;
        Ok(h / (rho * dth))
    };

    let mut center_row = Vec::with_capacity(p);
    let mut center_mass = 0.0;
    for j in 0..p {
        center_row.push((mesh.index(1, j), -radial_face(0, j)?));
        center_mass += metric.density(h / 4.0, theta(j))? * (h / 2.0) * dth;
    }
    let center_diag = -center_row.iter().map(|&(_, w)| w).sum::<f64>();

    let rings = (1..m)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::with_capacity(p);
            for j in 0..p {
                let jm = (j + p - 1) % p;
                let jp = (j + 1) % p;
                let inner = radial_face(i - 1, j)?;
                let outer = radial_face(i, j)?;
                let left = angular_face(i, jm)?;
                let right = angular_face(i, j)?;
                let mut row = Vec::with_capacity(4);
                row.push((if i == 1 { 0 } else { mesh.index(i - 1, j) }, -inner));
                if i + 1 < m {
                    row.push((mesh.index(i + 1, j), -outer));
                }
                row.push((mesh.index(i, jm), -left));
                row.push((mesh.index(i, jp), -right));
                let mass = metric.density(i as f64 * h, theta(j))? * h * dth;
                out.push((row, inner + outer + left + right, mass));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let n = mesh.unknowns();
    let mut rows = Vec::with_capacity(n);
    let mut diag = Vec::with_capacity(n);
    let mut mass = Vec::with_capacity(n);
    rows.push(center_row);
    diag.push(center_diag);
    mass.push(center_mass);
    for (row, d, w) in rings.into_iter().flatten() {
        rows.push(row);
        diag.push(d);
        mass.push(w);
    }
    if let Some(w) = mass.iter().find(|&&w| !(w > 0.0)) {
        return Err(Error::InvalidMetric(format!("non-positive cell measure {w}")));
    }
    Ok(Assembly { rows, diag, mass })
}

/// `max |K_ij - K_ji| / max |K_ij|` over the assembled stiffness matrix.
fn asymmetry(a: &Assembly) -> f64 {
    let mut scale = a.diag.iter().fold(0.0f64, |s, d| s.max(d.abs()));
    let mut worst = 0.0f64;
    for (i, row) in a.rows.iter().enumerate() {
        for &(j, v) in row {
            scale = scale.max(v.abs());
            let back = a.rows[j].iter().filter(|&&(k, _)| k == i).map(|&(_, w)| w).sum::<f64>();
            worst = worst.max((v - back).abs());
        }
    }
    worst / scale
}

/// Relative asymmetry of the stiffness matrix assembled for `metric` on `mesh`.
pub fn assembly_asymmetry(metric: &PolarMetric2D, mesh: &Mesh2D) -> Result<f64> {
    Ok(asymmetry(&assemble(metric, mesh)?))
}

/// First Dirichlet eigenvalue of the metric `dr² + ρ² dθ²` on the ball, by a
/// divergence-form finite-volume discretization and inverse iteration on
/// the mass-scaled stiffness matrix.
pub fn eigen_2d_polar(metric: &PolarMetric2D, mesh: &Mesh2D, tol: f64) -> Result<EigenResult> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if (mesh.radius - metric.radius()).abs() > 1e-12 * metric.radius() {
        return Err(Error::InvalidGrid(format!(
            "mesh radius {} differs from metric radius {}",
            mesh.radius,
            metric.radius()
        )));
    }
    metric.validate(&RadialGrid::uniform(mesh.radius, mesh.radial)?, mesh.angular)?;

    let asm = assemble(metric, mesh)?;
    let asym = asymmetry(&asm);
    if asym > ASYMMETRY_LIMIT {
        return Err(Error::Assembly { asymmetry: asym });
    }
    let scale: Vec<f64> = asm.mass.iter().map(|w| 1.0 / w.sqrt()).collect();
    let n = mesh.unknowns();
    let mut s = SymBand::zeros(n, mesh.angular);
    for i in 0..n {
        s.set(i, i, asm.diag[i] * scale[i] * scale[i]);
        for &(j, v) in &asm.rows[i] {
            if j < i {
                s.set(i, j, v * scale[i] * scale[j]);
            }
        }
    }
    let chol = s.clone().cholesky()?;

    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = f64::NAN;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut settled = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let y = chol.solve(&x);
        let yx: f64 = y.iter().zip(&x).map(|(a, b)| a * b).sum();
        let yy: f64 = y.iter().map(|a| a * a).sum();
        let next = yx / yy;
        let ny = yy.sqrt();
        x = y.into_iter().map(|v| v / ny).collect();
        let sx = s.matvec(&x);
        let r = sx.iter().zip(&x).map(|(a, b)| a - next * b).collect::<Vec<_>>();
        let new_residual = norm(&r) / next;
        let change = ((next - lambda) / next).abs();
        lambda = next;
        if change <= tol {
            // Keep iterating while the residual still improves, up to the floor set by rounding.
            if new_residual <= 10.0 * tol || (settled && new_residual >= 0.5 * residual) {
                residual = new_residual.min(residual);
                settled = true;
                break;
            }
            settled = true;
        }
        residual = new_residual;
    }
    if !settled {
        return Err(Error::Convergence { iterations, residual });
    }
    let mut u: Vec<f64> = x.iter().zip(&scale).map(|(v, s)| v * s).collect();
    let peak = u.iter().fold(0.0f64, |m, &v| if v.abs() > m.abs() { v } else { m });
    u.iter_mut().for_each(|v| *v /= peak);
    Ok(EigenResult {
        lambda1: lambda,
        eigenfunction: u,
        iterations,
        residual,
    })
}

/// Runs [`eigen_2d_polar`] on `mesh` and on its refinement.
pub fn eigen_2d_polar_study(metric: &PolarMetric2D, mesh: &Mesh2D, tol: f64) -> Result<MeshStudy> {
    let fine_mesh = mesh.refined();
    let (coarse, fine) = rayon::join(
        || eigen_2d_polar(metric, mesh, tol),
        || eigen_2d_polar(metric, &fine_mesh, tol),
    );
    let (coarse, fine) = (coarse?, fine?);
    let diff = fine.lambda1 - coarse.lambda1;
    Ok(MeshStudy {
        richardson: diff.abs() / 3.0,
        extrapolated: fine.lambda1 + diff / 3.0,
        coarse,
        fine,
    })
}

/// `∫(f')² ρ dr dθ / ∫ f² ρ dr dθ` for the radial profile `f` sampled on `grid`.
pub fn rayleigh_quotient_2d(metric: &PolarMetric2D, grid: &RadialGrid, profile: &[f64], m_theta: usize) -> Result<f64> {
    if profile.len() != grid.nodes().len() {
        return Err(Error::InvalidGrid(format!(
            "profile has {} values for {} grid nodes",
            profile.len(),
            grid.nodes().len()
        )));
    }
    let peak = profile.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let end = profile[profile.len() - 1];
    if end.abs() > 1e-12 * peak {
        return Err(Error::Domain(format!("profile must vanish at R, got f(R) = {end}")));
    }
    let area = area_from_polar_metric(metric, grid, m_theta)?.samples(grid)?;
    let slope = grid.derivative(profile);
    let num: Vec<f64> = slope.iter().zip(&area).map(|(d, a)| d * d * a).collect();
    let den: Vec<f64> = profile.iter().zip(&area).map(|(f, a)| f * f * a).collect();
    let den = grid.integrate(&den);
    if !(den > 0.0) {
        return Err(Error::DegenerateProfile(format!("∫f²ρ = {den}")));
    }
    Ok(grid.integrate(&num) / den)
}
