use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use super::{checked, unit_sphere_volume, RadialFn, RiemannianModel, WarpingFunction};
use crate::error::{Error, Result};
use crate::grid::{five_point, RadialGrid};
use crate::interp::Pchip;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AreaSource {
    ClosedForm,
    Sampled,
    FromMetric,
}

#[derive(Clone)]
enum Repr {
    Closed {
        value: RadialFn,
        derivative: Option<RadialFn>,
    },
    Sampled(Pchip),
}

/// Area `A(t)` of the geodesic sphere of radius `t`, for `t ∈ [0, R]`.
#[derive(Clone)]
pub struct AreaFunction {
    dimension: usize,
    radius: f64,
    source: AreaSource,
    repr: Repr,
    fd_step: f64,
}

impl fmt::Debug for AreaFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AreaFunction")
            .field("dimension", &self.dimension)
            .field("radius", &self.radius)
            .field("source", &self.source)
            .finish()
    }
}

impl AreaFunction {
    pub fn closed_form<F>(dimension: usize, radius: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::fallible(dimension, radius, move |t| Ok(f(t)))
    }

    pub fn fallible<F>(dimension: usize, radius: f64, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Send + Sync + 'static,
    {
        check_shape(dimension, radius)?;
        Ok(Self {
            dimension,
            radius,
            source: AreaSource::ClosedForm,
            repr: Repr::Closed {
                value: Arc::new(f),
                derivative: None,
            },
            fd_step: radius / 4096.0,
        })
    }

    pub fn with_derivative<F>(mut self, d: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if let Repr::Closed { derivative, .. } = &mut self.repr {
            *derivative = Some(Arc::new(move |t| Ok(d(t))));
        }
        self
    }

    /// Area known only at `nodes` (starting at 0 and ending at `R`),
    /// interpolated by a monotonicity-preserving cubic.
    pub fn sampled(dimension: usize, nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::from_samples(dimension, nodes, values, AreaSource::Sampled)
    }

    pub(crate) fn from_samples(
        dimension: usize,
        nodes: Vec<f64>,
        values: Vec<f64>,
        source: AreaSource,
    ) -> Result<Self> {
        let radius = *nodes.last().ok_or_else(|| Error::InvalidArea("no samples".into()))?;
        check_shape(dimension, radius)?;
        if nodes[0] != 0.0 {
            return Err(Error::InvalidArea(format!("first sample at {} instead of 0", nodes[0])));
        }
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if values[0].abs() > 1e-12 * scale.max(1.0) {
            return Err(Error::InvalidArea(format!("A(0) = {}, expected 0", values[0])));
        }
        if let Some((t, a)) = nodes.iter().zip(&values).skip(1).find(|(_, a)| !(**a > 0.0)) {
            return Err(Error::InvalidArea(format!("A({t}) = {a} is not positive")));
        }
        let min_gap = nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let mut values = values;
        values[0] = 0.0;
        Ok(Self {
            dimension,
            radius,
            source,
            repr: Repr::Sampled(Pchip::new(nodes, values)?),
            fd_step: min_gap,
        })
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn source(&self) -> AreaSource {
        self.source
    }

    pub fn has_analytic_derivative(&self) -> bool {
        matches!(
            self.repr,
            Repr::Closed {
                derivative: Some(_),
                ..
            }
        )
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match &self.repr {
            Repr::Closed { value, .. } => checked(value(t)?, "area", t),
            Repr::Sampled(p) => Ok(p.eval(t)),
        }
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        match &self.repr {
            Repr::Closed {
                derivative: Some(d), ..
            } => checked(d(t)?, "area derivative", t),
            Repr::Closed { .. } => five_point(|s| self.eval(s), t, self.fd_step, 0.0, self.radius),
            Repr::Sampled(p) => Ok(p.derivative(t)),
        }
    }

    /// `A` at every grid node, checking `A(0) = 0` and `A > 0` elsewhere.
    pub fn samples(&self, grid: &RadialGrid) -> Result<Vec<f64>> {
        if (grid.radius() - self.radius).abs() > 1e-12 * self.radius {
            return Err(Error::InvalidGrid(format!(
                "grid radius {} differs from area radius {}",
                grid.radius(),
                self.radius
            )));
        }
        let mut out = Vec::with_capacity(grid.nodes().len());
        for (i, &t) in grid.nodes().iter().enumerate() {
            let a = self.eval(t)?;
            if i == 0 {
                let scale = self.eval(grid.nodes()[1])?.abs().max(1e-300);
                if a.abs() > 1e-10 * scale {
                    return Err(Error::InvalidArea(format!("A(0) = {a}, expected 0")));
                }
                out.push(0.0);
            } else if a > 0.0 {
                out.push(a);
            } else {
                return Err(Error::InvalidArea(format!("A({t}) = {a} is not positive")));
            }
        }
        Ok(out)
    }

    /// `A(t)/t^{n-1}` at the first positive node, divided by `|S^{n-1}|`.
    pub fn center_ratio(&self, grid: &RadialGrid) -> Result<f64> {
        let t = grid.nodes()[1];
        Ok(self.eval(t)? / t.powi(self.dimension as i32 - 1) / unit_sphere_volume(self.dimension)?)
    }
}

fn check_shape(dimension: usize, radius: f64) -> Result<()> {
    if dimension < 2 {
        return Err(Error::Domain(format!("dimension must be at least 2, got {dimension}")));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {radius}")));
    }
    Ok(())
}

/// `A(t) = |S^{n-1}| ω(t)^{n-1}`.
pub fn area_from_warping(model: &RiemannianModel) -> Result<AreaFunction> {
    let n = model.dimension();
    let c = unit_sphere_volume(n)?;
    let p = (n - 1) as i32;
    let w = model.warping().clone();
    let value_w = w.clone();
    let mut area = AreaFunction::fallible(n, model.radius(), move |t| Ok(c * value_w.eval(t)?.powi(p)))?;
    if w.has_analytic_derivative() {
        if let Repr::Closed { derivative, .. } = &mut area.repr {
            *derivative = Some(Arc::new(move |t| {
                Ok(c * p as f64 * w.eval(t)?.powi(p - 1) * w.derivative(t)?)
            }));
        }
    }
    Ok(area)
}

/// `ω(t) = (A(t) / |S^{n-1}|)^{1/(n-1)}`, the warping of the rotationally
/// symmetric metric with the same sphere areas.
pub fn warping_from_area(area: &AreaFunction) -> Result<WarpingFunction> {
    let n = area.dimension();
    let c = unit_sphere_volume(n)?;
    let inv = 1.0 / (n - 1) as f64;
    let a = area.clone();
    let value = move |t: f64| {
        let v = a.eval(t)?;
        if v < 0.0 {
            return Err(Error::InvalidArea(format!("A({t}) = {v} is negative")));
        }
        Ok(if n == 2 { v / c } else { (v / c).powf(inv) })
    };
    let mut w = WarpingFunction::fallible(area.radius(), value).with_fd_step(area.fd_step);
    if area.source() != AreaSource::ClosedForm {
        w = w.lenient();
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::space_form_warping;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};

    #[test]
    fn area_of_models() {
        let flat = RiemannianModel::space_form(2, 0.0, 1.0).unwrap().area().unwrap();
        for t in [0.0, 0.25, 1.0] {
            assert!((flat.eval(t).unwrap() - 2.0 * PI * t).abs() < 1e-14);
        }
        let hyp = RiemannianModel::space_form(3, -1.0, 2.0).unwrap().area().unwrap();
        let expected = 4.0 * PI * 1f64.sinh().powi(2);
        assert!((hyp.eval(1.0).unwrap() - expected).abs() < 1e-12);
        assert!((hyp.eval(1.0).unwrap() - 17.3554).abs() < 1e-4);
        let sph = RiemannianModel::space_form(2, 1.0, 3.0).unwrap().area().unwrap();
        assert!((sph.eval(FRAC_PI_2).unwrap() - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn warping_of_known_areas() {
        let w = warping_from_area(&AreaFunction::closed_form(2, 1.0, |t| 2.0 * PI * t).unwrap()).unwrap();
        for t in [0.0, 0.3, 1.0] {
            assert!((w.eval(t).unwrap() - t).abs() < 1e-15);
        }
        let w = warping_from_area(&AreaFunction::closed_form(3, 2.0, |t: f64| 4.0 * PI * t.sinh().powi(2)).unwrap())
            .unwrap();
        for t in [0.1, 1.0, 2.0] {
            assert!((w.eval(t).unwrap() - t.sinh()).abs() < 1e-14 * t.sinh().max(1.0));
        }
        let w = warping_from_area(&AreaFunction::closed_form(2, 3.0, |t: f64| 2.0 * PI * t.sin()).unwrap()).unwrap();
        assert!((w.eval(FRAC_PI_6).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn negative_area_is_rejected() {
        let w = warping_from_area(&AreaFunction::closed_form(2, 1.0, |t| t - 0.5).unwrap()).unwrap();
        assert!(matches!(w.eval(0.2), Err(Error::InvalidArea(_))));
    }

    #[test]
    fn round_trip_on_builtin_models() {
        let grid_for = |r: f64| RadialGrid::uniform(r, 512).unwrap();
        for n in 2..=5 {
            for &(kappa, r) in &[(0.0, 1.0), (-1.0, 2.0), (1.0, FRAC_PI_2), (-4.0, 0.7), (0.25, 3.0)] {
                let model = RiemannianModel::space_form(n, kappa, r).unwrap();
                let back = warping_from_area(&model.area().unwrap()).unwrap();
                for &t in grid_for(r).nodes() {
                    let w = model.warping().eval(t).unwrap();
                    let b = back.eval(t).unwrap();
                    assert!((w - b).abs() <= 1e-12 * w.abs(), "n={n} κ={kappa} t={t}: {w} vs {b}");
                }
            }
        }
    }

    #[test]
    fn sampled_area_checks() {
        let nodes: Vec<f64> = (0..=32).map(|i| i as f64 / 32.0).collect();
        let good: Vec<f64> = nodes.iter().map(|t| 2.0 * PI * t).collect();
        let a = AreaFunction::sampled(2, nodes.clone(), good.clone()).unwrap();
        assert_eq!(a.source(), AreaSource::Sampled);
        assert!((a.eval(0.123).unwrap() - 2.0 * PI * 0.123).abs() < 1e-13);

        let mut hole = good.clone();
        hole[5] = 0.0;
        hole[6] = 0.0;
        assert!(matches!(
            AreaFunction::sampled(2, nodes.clone(), hole),
            Err(Error::InvalidArea(_))
        ));
        let mut offset = good.clone();
        offset[0] = 0.5;
        assert!(AreaFunction::sampled(2, nodes.clone(), offset).is_err());
        assert!(AreaFunction::sampled(1, nodes, good).is_err());
    }

    #[test]
    fn area_derivative_paths() {
        let model = RiemannianModel::space_form(3, -1.0, 2.0).unwrap();
        let analytic = model.area().unwrap();
        assert!(analytic.has_analytic_derivative());
        let numeric = AreaFunction::closed_form(3, 2.0, |t: f64| 4.0 * PI * t.sinh().powi(2)).unwrap();
        for t in [0.0f64, 0.5, 1.3, 2.0] {
            let exact = 8.0 * PI * t.sinh() * t.cosh();
            assert!((analytic.derivative(t).unwrap() - exact).abs() < 1e-12 * exact.max(1.0));
            assert!((numeric.derivative(t).unwrap() - exact).abs() < 1e-8 * exact.max(1.0));
        }
        let w = warping_from_area(&numeric).unwrap();
        let h = space_form_warping(-1.0, 2.0).unwrap();
        for t in [0.3, 1.0, 1.9] {
            assert!((w.derivative(t).unwrap() - h.derivative(t).unwrap()).abs() < 1e-8);
        }
    }
}
