//! Built-in models and metrics.

use crate::error::Result;
use crate::geometry::{PolarMetric2D, RiemannianModel};

/// First positive zero of the Bessel function `J_0`.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// First Dirichlet eigenvalue of the Euclidean disc of radius `r`.
pub fn euclidean_disc_lambda1(r: f64) -> f64 {
    J0_FIRST_ZERO * J0_FIRST_ZERO / (r * r)
}

/// Flat-to-the-left smooth bump: `0` for `t ≤ 2`, `exp(-1/(t-2)²)` beyond.
pub fn bump(t: f64) -> f64 {
    if t <= 2.0 {
        0.0
    } else {
        (-1.0 / ((t - 2.0) * (t - 2.0))).exp()
    }
}

pub fn bump_derivative(t: f64) -> f64 {
    if t <= 2.0 {
        0.0
    } else {
        2.0 * bump(t) / (t - 2.0).powi(3)
    }
}

/// Expression-language form of [`bump`].
pub const BUMP_EXPR: &str = "piecewise(t <= 2: 0; exp(-1/(t-2)^2))";

/// Density of the example metric `dr² + (r + φ(r) cos θ)² dθ²`.
pub const EXAMPLE_DENSITY_EXPR: &str = "r + piecewise(r <= 2: 0; exp(-1/(r-2)^2)) * cos(theta)";

/// `dr² + (r + φ(r) cos θ)² dθ²` with the bump `φ`: flat on the disc of
/// radius 2, sphere areas `2πt` everywhere, non-radial mean curvature
/// beyond radius 2.
pub fn example_metric(radius: f64) -> Result<PolarMetric2D> {
    Ok(PolarMetric2D::new(radius, |r, th: f64| r + bump(r) * th.cos())?
        .with_radial_derivative(|r, th: f64| 1.0 + bump_derivative(r) * th.cos()))
}

pub fn euclidean(dimension: usize, radius: f64) -> Result<RiemannianModel> {
    RiemannianModel::space_form(dimension, 0.0, radius)
}

pub fn spherical(dimension: usize, kappa: f64, radius: f64) -> Result<RiemannianModel> {
    RiemannianModel::space_form(dimension, kappa.abs(), radius)
}

pub fn hyperbolic(dimension: usize, kappa: f64, radius: f64) -> Result<RiemannianModel> {
    RiemannianModel::space_form(dimension, -kappa.abs(), radius)
}
