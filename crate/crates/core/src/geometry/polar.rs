use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use super::{checked, AreaFunction, AreaSource, DensityFn, WarpingFunction};
use crate::error::{Error, Result};
use crate::grid::{five_point, RadialGrid};

/// A 2-D metric `dr² + ρ(r, θ)² dθ²` in geodesic polar coordinates, given
/// by its density `ρ = √det G`.
#[derive(Clone)]
pub struct PolarMetric2D {
    radius: f64,
    density: DensityFn,
    density_r: Option<DensityFn>,
    fd_step: f64,
}

impl fmt::Debug for PolarMetric2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolarMetric2D")
            .field("radius", &self.radius)
            .field("analytic_derivative", &self.density_r.is_some())
            .finish()
    }
}

impl PolarMetric2D {
    pub fn new<F>(radius: f64, rho: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self::fallible(radius, move |r, th| Ok(rho(r, th)))
    }

    pub fn fallible<F>(radius: f64, rho: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<f64> + Send + Sync + 'static,
    {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Domain(format!("radius must be positive, got {radius}")));
        }
        Ok(Self {
            radius,
            density: Arc::new(rho),
            density_r: None,
            fd_step: radius / 4096.0,
        })
    }

    pub fn with_radial_derivative<F>(mut self, d: F) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        self.density_r = Some(Arc::new(move |r, th| Ok(d(r, th))));
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    /// The rotationally symmetric metric `dr² + ω(r)² dθ²`.
    pub fn rotational(warping: WarpingFunction) -> Result<Self> {
        let w = warping.clone();
        let m = Self::fallible(warping.radius(), move |r, _| w.eval(r))?;
        let d = warping.clone();
        Ok(Self {
            density_r: Some(Arc::new(move |r, _| d.derivative(r))),
            ..m
        })
    }

    /// Same metric rotated by `theta0`: `ρ'(r, θ) = ρ(r, θ + θ₀)`.
    pub fn rotated(&self, theta0: f64) -> Self {
        let rho = self.density.clone();
        let density: DensityFn = Arc::new(move |r, th| rho(r, th + theta0));
        let density_r = self
            .density_r
            .clone()
            .map(|d| -> DensityFn { Arc::new(move |r, th| d(r, th + theta0)) });
        Self {
            radius: self.radius,
            density,
            density_r,
            fd_step: self.fd_step,
        }
    }

    /// Same density with every value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let rho = self.density.clone();
        let density: DensityFn = Arc::new(move |r, th| Ok(c * rho(r, th)?));
        let density_r = self
            .density_r
            .clone()
            .map(|d| -> DensityFn { Arc::new(move |r, th| Ok(c * d(r, th)?)) });
        Self {
            radius: self.radius,
            density,
            density_r,
            fd_step: self.fd_step,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn density(&self, r: f64, theta: f64) -> Result<f64> {
        checked((self.density)(r, theta)?, "density", r)
    }

    pub fn density_r(&self, r: f64, theta: f64) -> Result<f64> {
        match &self.density_r {
            Some(d) => checked(d(r, theta)?, "density derivative", r),
            None => five_point(|s| self.density(s, theta), r, self.fd_step, 0.0, self.radius),
        }
    }

    /// Checks positivity and θ-periodicity on the grid, and warns when the
    /// metric does not close up smoothly at the center.
    pub fn validate(&self, grid: &RadialGrid, m_theta: usize) -> Result<()> {
        let angles = uniform_angles(m_theta)?;
        for &r in &grid.nodes()[1..] {
            for &th in &angles {
                let rho = self.density(r, th)?;
                if rho <= 0.0 {
                    return Err(Error::InvalidMetric(format!("ρ({r}, {th}) = {rho} is not positive")));
                }
            }
            let (a, b) = (self.density(r, 0.0)?, self.density(r, TAU)?);
            if (a - b).abs() > 1e-12 * a.abs().max(1.0) {
                return Err(Error::InvalidMetric(format!(
                    "density is not 2π-periodic at r = {r}: {a} vs {b}"
                )));
            }
        }
        let r1 = grid.nodes()[1].min(1e-3);
        for &th in &angles {
            let ratio = self.density(r1, th)? / r1;
            if (ratio - 1.0).abs() > 1e-3 {
                log::warn!("ρ(r, θ)/r = {ratio} at r = {r1}, θ = {th}; the metric is singular at the center");
                break;
            }
        }
        Ok(())
    }
}

pub(crate) fn uniform_angles(m_theta: usize) -> Result<Vec<f64>> {
    if m_theta < 8 || !m_theta.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "angular resolution must be even and at least 8, got {m_theta}"
        )));
    }
    let d = TAU / m_theta as f64;
    Ok((0..m_theta).map(|j| j as f64 * d).collect())
}

/// `A(t) = ∫_0^{2π} ρ(t, θ) dθ` at every grid node by the uniform trapezoid rule.
pub fn area_from_polar_metric(metric: &PolarMetric2D, grid: &RadialGrid, m_theta: usize) -> Result<AreaFunction> {
    if (grid.radius() - metric.radius()).abs() > 1e-12 * metric.radius() {
        return Err(Error::InvalidGrid(format!(
            "grid radius {} differs from metric radius {}",
            grid.radius(),
            metric.radius()
        )));
    }
    let angles = uniform_angles(m_theta)?;
    let dtheta = TAU / m_theta as f64;
    let values = grid
        .nodes()
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            if i == 0 {
                return Ok(0.0);
            }
            let mut sum = 0.0;
            for &th in &angles {
                sum += metric.density(t, th)?;
            }
            let a = sum * dtheta;
            if a < 0.0 {
                return Err(Error::InvalidMetric(format!("negative sphere area {a} at t = {t}")));
            }
            Ok(a)
        })
        .collect::<Result<Vec<f64>>>()?;
    AreaFunction::from_samples(2, grid.nodes().to_vec(), values, AreaSource::FromMetric)
}

/// Inward mean curvature `H(t, θ) = ∂_r ln ρ` of the geodesic circle of radius `t`.
pub fn mean_curvature_field(metric: &PolarMetric2D, t: f64, theta: f64) -> Result<f64> {
    if !(t > 0.0 && t < metric.radius()) {
        return Err(Error::Domain(format!(
            "mean curvature needs 0 < t < R = {}, got t = {t}",
            metric.radius()
        )));
    }
    let rho = metric.density(t, theta)?;
    if rho <= 0.0 {
        return Err(Error::InvalidMetric(format!("ρ({t}, {theta}) = {rho} is not positive")));
    }
    Ok(metric.density_r(t, theta)? / rho)
}

/// `max_i (max_θ H(t_i, θ) - min_θ H(t_i, θ))` over the interior grid nodes.
pub fn radiality_deviation(metric: &PolarMetric2D, grid: &RadialGrid, m_theta: usize) -> Result<f64> {
    let angles = uniform_angles(m_theta)?;
    let nodes = grid.nodes();
    let spreads = nodes[1..nodes.len() - 1]
        .par_iter()
        .map(|&t| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &th in &angles {
                let h = mean_curvature_field(metric, t, th)?;
                lo = lo.min(h);
                hi = hi.max(h);
            }
            Ok(hi - lo)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(spreads.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::geometry::space_form_warping;
    use std::f64::consts::{FRAC_PI_2, PI};

    /// Closed-form mean curvature of the bumped example metric as printed in
    /// the literature, used as an independent oracle.
    fn example_mean_curvature(t: f64, theta: f64) -> f64 {
        if t <= 2.0 {
            1.0 / t
        } else {
            let c = theta.cos();
            1.0 / t
                - (t - 4.0) * ((t - 2.0) * t + 2.0) * c
                    / ((t - 2.0).powi(3) * t * (c + (1.0 / (t - 2.0).powi(2)).exp() * t))
        }
    }

    #[test]
    fn example_metric_has_euclidean_area() {
        let metric = builtin::example_metric(3.0).unwrap();
        let grid = RadialGrid::uniform(3.0, 4096).unwrap();
        let area = area_from_polar_metric(&metric, &grid, 256).unwrap();
        assert_eq!(area.source(), AreaSource::FromMetric);
        for &t in grid.nodes() {
            assert!((area.eval(t).unwrap() - 2.0 * PI * t).abs() < 1e-10);
        }
    }

    #[test]
    fn angular_oscillation_integrates_out() {
        let grid = RadialGrid::uniform(1.0, 64).unwrap();
        let flat = PolarMetric2D::new(1.0, |r, _| r).unwrap();
        let wavy = PolarMetric2D::new(1.0, |r, th: f64| r * (1.0 + 0.3 * (3.0 * th).sin())).unwrap();
        for metric in [flat, wavy] {
            let area = area_from_polar_metric(&metric, &grid, 16).unwrap();
            for &t in grid.nodes() {
                assert!((area.eval(t).unwrap() - 2.0 * PI * t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn theta_independent_density_gives_exact_area() {
        let grid = RadialGrid::uniform(2.0, 64).unwrap();
        let w = space_form_warping(-1.0, 2.0).unwrap();
        let metric = PolarMetric2D::rotational(w.clone()).unwrap();
        let area = area_from_polar_metric(&metric, &grid, 32).unwrap();
        for &t in &grid.nodes()[1..] {
            let exact = TAU * w.eval(t).unwrap();
            assert!((area.eval(t).unwrap() - exact).abs() <= 64.0 * f64::EPSILON * exact);
        }
    }

    #[test]
    fn angular_resolution_is_checked() {
        let grid = RadialGrid::uniform(1.0, 64).unwrap();
        let flat = PolarMetric2D::new(1.0, |r, _| r).unwrap();
        assert!(area_from_polar_metric(&flat, &grid, 6).is_err());
        assert!(area_from_polar_metric(&flat, &grid, 9).is_err());
        let negative = PolarMetric2D::new(1.0, |r, th: f64| r * (th.cos() - 1.5)).unwrap();
        assert!(matches!(
            area_from_polar_metric(&negative, &grid, 16),
            Err(Error::InvalidMetric(_))
        ));
        assert!(negative.validate(&grid, 16).is_err());
    }

    #[test]
    fn mean_curvature_examples() {
        let metric = builtin::example_metric(3.5).unwrap();
        for k in 0..8 {
            let th = k as f64 * 0.8;
            assert!((mean_curvature_field(&metric, 1.5, th).unwrap() - 1.0 / 1.5).abs() < 1e-14);
        }
        let flat = PolarMetric2D::new(3.0, |r, _| r).unwrap();
        assert!((mean_curvature_field(&flat, 2.0, 0.7).unwrap() - 0.5).abs() < 1e-9);

        let h0 = mean_curvature_field(&metric, 3.0, 0.0).unwrap();
        let hpi = mean_curvature_field(&metric, 3.0, PI).unwrap();
        assert!((h0 - example_mean_curvature(3.0, 0.0)).abs() < 1e-12);
        assert!((hpi - example_mean_curvature(3.0, PI)).abs() < 1e-12);
        assert!((h0 - hpi).abs() > 0.1);
        assert!(h0 > 1.0 / 3.0);

        let numeric = PolarMetric2D::new(3.5, |r, th: f64| r + builtin::bump(r) * th.cos())
            .unwrap()
            .with_fd_step(1e-3);
        for &(t, th) in &[(2.5, 0.0), (3.0, 1.0), (3.2, PI)] {
            let a = mean_curvature_field(&numeric, t, th).unwrap();
            assert!((a - example_mean_curvature(t, th)).abs() < 1e-8, "t={t}");
        }
    }

    #[test]
    fn mean_curvature_domain() {
        let flat = PolarMetric2D::new(1.0, |r, _| r).unwrap();
        assert!(mean_curvature_field(&flat, 0.0, 0.0).is_err());
        assert!(mean_curvature_field(&flat, 1.0, 0.0).is_err());
        assert!(mean_curvature_field(&flat, -0.5, 0.0).is_err());
        let bad = PolarMetric2D::new(1.0, |r, _| r - 0.5).unwrap();
        assert!(matches!(
            mean_curvature_field(&bad, 0.25, 0.0),
            Err(Error::InvalidMetric(_))
        ));
    }

    #[test]
    fn space_form_mean_curvature_is_log_derivative() {
        for &(kappa, r) in &[(1.0, FRAC_PI_2), (-1.0, 2.0), (0.0, 1.0), (4.0, 1.0)] {
            let w = space_form_warping(kappa, r).unwrap();
            let metric = PolarMetric2D::rotational(w.clone()).unwrap();
            for k in 1..10 {
                let t = r * k as f64 / 10.0;
                let h = mean_curvature_field(&metric, t, 0.3 * k as f64).unwrap();
                let expected = w.derivative(t).unwrap() / w.eval(t).unwrap();
                assert!((h - expected).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn radiality_examples() {
        let grid = RadialGrid::uniform(3.0, 512).unwrap();
        let flat = PolarMetric2D::new(3.0, |r, _| r).unwrap();
        assert_eq!(radiality_deviation(&flat, &grid, 32).unwrap(), 0.0);
        let cap_grid = RadialGrid::uniform(FRAC_PI_2, 512).unwrap();
        let cap = PolarMetric2D::new(FRAC_PI_2, |r: f64, _| r.sin()).unwrap();
        assert_eq!(radiality_deviation(&cap, &cap_grid, 32).unwrap(), 0.0);

        let metric = builtin::example_metric(3.0).unwrap();
        let dev = radiality_deviation(&metric, &grid, 32).unwrap();
        let spread = example_mean_curvature(2.5, 0.0) - example_mean_curvature(2.5, PI);
        assert!(spread.abs() > 1e-3);
        assert!(dev >= spread.abs());
        assert!(dev > 1e-3);
    }

    #[test]
    fn radiality_is_rotation_invariant() {
        let grid = RadialGrid::uniform(3.0, 512).unwrap();
        let metric = builtin::example_metric(3.0).unwrap();
        // 48 angles: a rotation by π/3 permutes the sample set.
        let a = radiality_deviation(&metric, &grid, 48).unwrap();
        let b = radiality_deviation(&metric.rotated(PI / 3.0), &grid, 48).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}
