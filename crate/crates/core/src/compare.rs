//! Cheng-type comparison: when `A_g / A_ref` is non-increasing, the first
//! eigenvalue of `g` is at most that of the reference model.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{
    area_from_polar_metric, mean_curvature_field, radiality_deviation, AreaFunction, PolarMetric2D, RiemannianModel,
    WarpingFunction,
};
use crate::grid::{RadialGrid, MIN_INTERVALS};
use crate::moments::run_until_converged;
use crate::oracle::shoot_radial_lambda1;

pub const DEFAULT_SLACK: f64 = 1e-10;

/// What is being bounded.
#[derive(Debug, Clone)]
pub enum Subject {
    Model(RiemannianModel),
    Metric(PolarMetric2D),
}

impl Subject {
    pub fn dimension(&self) -> usize {
        match self {
            Subject::Model(m) => m.dimension(),
            Subject::Metric(_) => 2,
        }
    }

    pub fn radius(&self) -> f64 {
        match self {
            Subject::Model(m) => m.radius(),
            Subject::Metric(m) => m.radius(),
        }
    }
}

/// The comparison model: a space form of curvature `κ` or a warped product
/// with warping `W`.
#[derive(Debug, Clone)]
pub enum Reference {
    SpaceForm(f64),
    Warping(WarpingFunction),
}

impl Reference {
    fn label(&self) -> String {
        match self {
            Reference::SpaceForm(k) => format!("space-form(kappa={k})"),
            Reference::Warping(_) => "warping".to_string(),
        }
    }

    fn model(&self, dimension: usize, radius: f64) -> Result<RiemannianModel> {
        match self {
            Reference::SpaceForm(k) => RiemannianModel::space_form(dimension, *k, radius),
            Reference::Warping(w) => {
                if (w.radius() - radius).abs() > 1e-12 * radius {
                    return Err(Error::Domain(format!(
                        "reference radius {} differs from subject radius {radius}",
                        w.radius()
                    )));
                }
                RiemannianModel::new(dimension, w.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CompareSettings {
    pub grid_intervals: usize,
    pub m_theta: usize,
    pub k_max: usize,
    /// Relative Cauchy tolerance of the moment estimators.
    pub tol: f64,
    /// Bisection width of the shooting oracle.
    pub oracle_tol: f64,
    pub slack: f64,
    /// Largest mean-curvature spread still counted as radial.
    pub radiality_tol: f64,
}

impl Default for CompareSettings {
    fn default() -> Self {
        Self {
            grid_intervals: 4096,
            m_theta: 256,
            k_max: 200,
            tol: 1e-8,
            oracle_tol: 1e-10,
            slack: DEFAULT_SLACK,
            radiality_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    BoundHolds,
    EqualityCandidate,
    HypothesisFails,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub model_id: String,
    pub reference: String,
    pub dimension: usize,
    pub radius: f64,
    pub bound: f64,
    pub bound_converged: bool,
    pub reference_lambda: f64,
    pub monotone_ok: bool,
    pub ratio_profile: Vec<f64>,
    pub radiality: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Whether `q = A_g / A_ref` is non-increasing on the grid, with
/// `q_{i+1} ≤ q_i (1 + slack)`; `q(0)` is taken as 1. Returns the profile too.
pub fn monotonicity_check(
    area_g: &AreaFunction,
    area_ref: &AreaFunction,
    grid: &RadialGrid,
    slack: f64,
) -> Result<(bool, Vec<f64>)> {
    if !(slack >= 0.0) {
        return Err(Error::Domain(format!("slack must be non-negative, got {slack}")));
    }
    if area_g.dimension() != area_ref.dimension() {
        return Err(Error::Domain(format!(
            "dimensions differ: {} vs {}",
            area_g.dimension(),
            area_ref.dimension()
        )));
    }
    let g = area_g.samples(grid)?;
    let mut profile = Vec::with_capacity(g.len());
    profile.push(1.0);
    for (i, &a) in g.iter().enumerate().skip(1) {
        let b = area_ref.eval(grid.nodes()[i])?;
        if !(b > 0.0) {
            return Err(Error::Domain(format!(
                "reference area vanishes at t = {}",
                grid.nodes()[i]
            )));
        }
        profile.push(a / b);
    }
    let ok = profile.windows(2).all(|w| w[1] <= w[0] * (1.0 + slack));
    Ok((ok, profile))
}

fn subject_area(subject: &Subject, grid: &RadialGrid, m_theta: usize) -> Result<AreaFunction> {
    match subject {
        Subject::Model(m) => m.area(),
        Subject::Metric(m) => area_from_polar_metric(m, grid, m_theta),
    }
}

/// Bound for `g` from the moment hierarchy against the reference eigenvalue
/// from the shooting oracle, classified by the monotonicity hypothesis.
///
/// Fails with [`Error::BoundViolated`] if the hypothesis holds but the bound
/// exceeds the reference by more than the combined tolerance.
pub fn cheng_report(
    model_id: &str,
    subject: &Subject,
    reference: &Reference,
    settings: &CompareSettings,
) -> Result<ComparisonReport> {
    let radius = subject.radius();
    let dimension = subject.dimension();
    let grid = RadialGrid::uniform(radius, settings.grid_intervals)?;
    let ref_model = reference.model(dimension, radius)?;
    if let Reference::Warping(w) = reference {
        w.validate(&grid)?;
    }
    let area_g = subject_area(subject, &grid, settings.m_theta)?;
    let area_ref = ref_model.area()?;
    let (monotone_ok, ratio_profile) = monotonicity_check(&area_g, &area_ref, &grid, settings.slack)?;

    let run = run_until_converged(&area_g, &grid, settings.tol, settings.k_max)?;
    if !run.converged() {
        log::warn!("{model_id}: estimators did not converge in {} levels", run.levels);
    }
    let bound = run.bound();

    let reference_lambda = shoot_radial_lambda1(&ref_model, &grid, settings.oracle_tol)?.lambda1;
    let coarse = RadialGrid::uniform(radius, (settings.grid_intervals / 2).max(MIN_INTERVALS))?;
    let coarse_lambda = shoot_radial_lambda1(&ref_model, &coarse, settings.oracle_tol)?.lambda1;
    let richardson = (reference_lambda - coarse_lambda).abs() / 15.0;
    let tolerance = 5.0 * settings.tol * bound + settings.oracle_tol + richardson;

    let radiality = match subject {
        Subject::Model(_) => 0.0,
        Subject::Metric(m) => radiality_deviation(m, &grid, settings.m_theta)?,
    };

    let verdict = if !monotone_ok {
        Verdict::HypothesisFails
    } else if (bound - reference_lambda).abs() <= tolerance && radiality <= settings.radiality_tol {
        Verdict::EqualityCandidate
    } else if bound <= reference_lambda + tolerance {
        Verdict::BoundHolds
    } else {
        return Err(Error::BoundViolated {
            bound,
            reference: reference_lambda,
            tolerance,
        });
    };
    Ok(ComparisonReport {
        model_id: model_id.to_string(),
        reference: reference.label(),
        dimension,
        radius,
        bound,
        bound_converged: run.converged(),
        reference_lambda,
        monotone_ok,
        ratio_profile,
        radiality,
        tolerance,
        verdict,
    })
}

/// Whether the geodesic circles have constant mean curvature `h(t)` and
/// `h = ω'/ω` for the symmetrized warping, i.e. whether the metric is
/// already rotationally symmetric. Curvatures are compared relative to
/// `max(1, |h|)`.
pub fn equality_criterion(metric: &PolarMetric2D, grid: &RadialGrid, m_theta: usize, tol: f64) -> Result<bool> {
    if radiality_deviation(metric, grid, m_theta)? > tol {
        return Ok(false);
    }
    let angles: Vec<f64> = (0..m_theta)
        .map(|j| j as f64 * std::f64::consts::TAU / m_theta as f64)
        .collect();
    let nodes = grid.nodes();
    for &t in &nodes[1..nodes.len() - 1] {
        let (mut a, mut da) = (0.0, 0.0);
        for &th in &angles {
            a += metric.density(t, th)?;
            da += metric.density_r(t, th)?;
        }
        // ω'/ω of the symmetrized metric equals A'/A in dimension 2
        let symmetric = da / a;
        let h = mean_curvature_field(metric, t, 0.0)?;
        if (h - symmetric).abs() > tol * h.abs().max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}
