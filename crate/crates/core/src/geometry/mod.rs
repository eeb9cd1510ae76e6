//! Radial geometry of geodesic balls: warping functions, area functions of
//! geodesic spheres, 2-D polar metrics and the mean curvature of their
//! geodesic circles.
//!
//! A ball of radius `R` whose geodesic spheres have area `A(t)` is compared
//! with the rotationally symmetric metric `dr² + ω(r)² g_sphere` whose
//! warping is `ω(t) = (A(t) / |S^{n-1}|)^{1/(n-1)}`. The two metrics share
//! the area function, and every computation downstream only needs `A`.

mod area;
mod polar;
mod warping;

use std::sync::Arc;

pub use area::{area_from_warping, warping_from_area, AreaFunction, AreaSource};
pub use polar::{area_from_polar_metric, mean_curvature_field, radiality_deviation, PolarMetric2D};
pub use warping::{space_form_warping, RiemannianModel, WarpingFunction};

use crate::error::{Error, Result};

pub(crate) type RadialFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;
pub(crate) type DensityFn = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;

/// Volume of the unit sphere `S^{n-1} ⊂ R^n`, i.e. `2π^{n/2} / Γ(n/2)`.
pub fn unit_sphere_volume(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {n}")));
    }
    // Γ(n/2) by the recurrence Γ(x+1) = xΓ(x) from Γ(1) = 1 or Γ(1/2) = √π.
    let (mut gamma, mut x) = if n.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (std::f64::consts::PI.sqrt(), 0.5)
    };
    let half = n as f64 / 2.0;
    while x < half {
        gamma *= x;
        x += 1.0;
    }
    Ok(2.0 * std::f64::consts::PI.powf(half) / gamma)
}

pub(crate) fn checked(v: f64, what: &str, at: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{what} is not finite at {at}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_sphere_volumes() {
        assert!((unit_sphere_volume(2).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((unit_sphere_volume(3).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert!((unit_sphere_volume(4).unwrap() - 19.739_208_80).abs() < 1e-8);
        assert!(unit_sphere_volume(1).is_err());
        assert!(unit_sphere_volume(0).is_err());
    }

    #[test]
    fn unit_sphere_volume_matches_gamma_function() {
        for n in 2..=12 {
            let half = n as f64 / 2.0;
            let oracle = 2.0 * PI.powf(half) / statrs::function::gamma::gamma(half);
            let v = unit_sphere_volume(n).unwrap();
            assert!((v - oracle).abs() <= 1e-12 * oracle, "n={n}: {v} vs {oracle}");
        }
    }
}
