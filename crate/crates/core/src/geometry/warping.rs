use std::fmt;
use std::sync::Arc;

use super::{checked, RadialFn};
use crate::error::{Error, Result};
use crate::grid::{five_point, RadialGrid};

/// Tolerance on `ω(t)/t - 1` at the smallest probe radius.
pub const CENTER_TOLERANCE: f64 = 1e-6;

/// Radial profile `ω` of a rotationally symmetric metric on `[0, R]`.
#[derive(Clone)]
pub struct WarpingFunction {
    radius: f64,
    value: RadialFn,
    derivative: Option<RadialFn>,
    fd_step: f64,
    /// Sampled data only warns about a bad `ω(t)/t` limit.
    lenient_center: bool,
}

impl fmt::Debug for WarpingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WarpingFunction")
            .field("radius", &self.radius)
            .field("analytic_derivative", &self.derivative.is_some())
            .field("fd_step", &self.fd_step)
            .finish()
    }
}

impl WarpingFunction {
    pub fn new<F>(radius: f64, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::fallible(radius, move |t| Ok(f(t)))
    }

    pub fn fallible<F>(radius: f64, f: F) -> Self
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        Self {
            radius,
            value: Arc::new(f),
            derivative: None,
            fd_step: radius / 4096.0,
            lenient_center: false,
        }
    }

    pub fn with_derivative<F>(mut self, d: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.derivative = Some(Arc::new(move |t| Ok(d(t))));
        self
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub(crate) fn lenient(mut self) -> Self {
        self.lenient_center = true;
        self
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn has_analytic_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        checked((self.value)(t)?, "warping", t)
    }

    /// `ω'(t)`: analytic when registered, otherwise five-point differences.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        match &self.derivative {
            Some(d) => checked(d(t)?, "warping derivative", t),
            None => five_point(|s| self.eval(s), t, self.fd_step, 0.0, self.radius),
        }
    }

    /// Checks `ω(0) = 0`, `ω > 0` at every positive node, and `ω(t)/t → 1`.
    pub fn validate(&self, grid: &RadialGrid) -> Result<()> {
        let w0 = self.eval(0.0)?;
        if w0.abs() > 1e-12 {
            return Err(Error::InvalidModel(format!("ω(0) = {w0}, expected 0")));
        }
        for &t in &grid.nodes()[1..] {
            let w = self.eval(t)?;
            if w <= 0.0 {
                return Err(Error::InvalidModel(format!("ω({t}) = {w} is not positive")));
            }
        }
        let probe = grid.nodes()[1].min(1e-3);
        let ratio = self.eval(probe)? / probe;
        if (ratio - 1.0).abs() > CENTER_TOLERANCE {
            let msg = format!("ω(t)/t = {ratio} at t = {probe}; the metric is singular at the center");
            if self.lenient_center {
                log::warn!("{msg}");
            } else {
                return Err(Error::InvalidModel(msg));
            }
        }
        Ok(())
    }
}

/// `S_κ`: `sin(√κ t)/√κ`, `t` or `sinh(√-κ t)/√-κ` by the sign of `κ`.
pub fn space_form_warping(kappa: f64, radius: f64) -> Result<WarpingFunction> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    if !kappa.is_finite() {
        return Err(Error::Domain(format!("curvature must be finite, got {kappa}")));
    }
    let w = if kappa > 0.0 {
        let s = kappa.sqrt();
        if radius >= std::f64::consts::PI / s {
            return Err(Error::Domain(format!(
                "radius {radius} reaches the antipodal point of the κ = {kappa} sphere (π/√κ = {})",
                std::f64::consts::PI / s
            )));
        }
        WarpingFunction::new(radius, move |t| (s * t).sin() / s).with_derivative(move |t| (s * t).cos())
    } else if kappa < 0.0 {
        let s = (-kappa).sqrt();
        WarpingFunction::new(radius, move |t| (s * t).sinh() / s).with_derivative(move |t| (s * t).cosh())
    } else {
        WarpingFunction::new(radius, |t| t).with_derivative(|_| 1.0)
    };
    Ok(w)
}

/// Ball of radius `R` carrying the metric `dr² + ω(r)² g_{S^{n-1}}`.
#[derive(Debug, Clone)]
pub struct RiemannianModel {
    dimension: usize,
    warping: WarpingFunction,
}

impl RiemannianModel {
    pub fn new(dimension: usize, warping: WarpingFunction) -> Result<Self> {
        if dimension < 2 {
            return Err(Error::Domain(format!("dimension must be at least 2, got {dimension}")));
        }
        Ok(Self { dimension, warping })
    }

    pub fn space_form(dimension: usize, kappa: f64, radius: f64) -> Result<Self> {
        Self::new(dimension, space_form_warping(kappa, radius)?)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn radius(&self) -> f64 {
        self.warping.radius()
    }

    pub fn warping(&self) -> &WarpingFunction {
        &self.warping
    }

    pub fn area(&self) -> Result<super::AreaFunction> {
        super::area_from_warping(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn space_form_values() {
        let flat = space_form_warping(0.0, 5.0).unwrap();
        for t in [0.0, 0.3, 1.7, 5.0] {
            assert_eq!(flat.eval(t).unwrap(), t);
        }
        let hyp = space_form_warping(-1.0, 2.0).unwrap();
        assert!((hyp.eval(1.0).unwrap() - 1.175_201_19).abs() < 1e-8);
        let sph = space_form_warping(1.0, 2.0).unwrap();
        assert!((sph.eval(FRAC_PI_2).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sphere_radius_limit() {
        assert!(space_form_warping(1.0, PI).is_err());
        assert!(space_form_warping(4.0, 1.6).is_err());
        assert!(space_form_warping(4.0, 1.5).is_ok());
    }

    #[test]
    fn analytic_and_numeric_derivatives_agree() {
        let w = space_form_warping(-1.0, 2.0).unwrap();
        let numeric = WarpingFunction::new(2.0, |t: f64| t.sinh()).with_fd_step(1e-3);
        for t in [0.0, 1e-4, 0.5, 1.0, 1.999, 2.0] {
            let a = w.derivative(t).unwrap();
            let n = numeric.derivative(t).unwrap();
            assert!((a - n).abs() < 1e-10, "t={t}: {a} vs {n}");
        }
    }

    #[test]
    fn validation() {
        let g = RadialGrid::uniform(2.0, 64).unwrap();
        assert!(space_form_warping(-1.0, 2.0).unwrap().validate(&g).is_ok());
        let cone = WarpingFunction::new(2.0, |t| 2.0 * t);
        assert!(matches!(cone.validate(&g), Err(Error::InvalidModel(_))));
        assert!(cone.clone().lenient().validate(&g).is_ok());
        let shifted = WarpingFunction::new(2.0, |t| t + 0.1);
        assert!(shifted.validate(&g).is_err());
        let vanishing = WarpingFunction::new(2.0, |t: f64| (2.0 * t).sin() / 2.0);
        assert!(vanishing.validate(&g).is_err());
    }

    #[test]
    fn model_rejects_low_dimension() {
        assert!(RiemannianModel::space_form(1, 0.0, 1.0).is_err());
        let m = RiemannianModel::space_form(3, 0.0, 1.5).unwrap();
        assert_eq!(m.dimension(), 3);
        assert_eq!(m.radius(), 1.5);
    }
}
