//! Recursive moment functions of a radial area profile and the three
//! eigenvalue estimators built from them.
//!
//! Starting from `T_0 = 1`,
//!
//! ```text
//! T_k(t) = ∫_t^R ( ∫_0^σ T_{k-1}(s) A(s) ds ) / A(σ) dσ
//! ```
//!
//! Each level costs two cumulative passes over the grid. `T_k(0)` decays
//! like `λ^{-k}`, so every level is stored rescaled to `T̂_k(0) = 1` with the
//! logarithm of the factor kept separately. As `k → ∞` the ratios
//!
//! * `(∫T_k² A / ∫T_{k+1}² A)^{1/2}` (norm ratio),
//! * `T_{k-1}(0) / T_k(0)` (center ratio),
//! * `∫T_{k-1} A / ∫T_k A` (mass ratio)
//!
//! all converge to the first Dirichlet eigenvalue of the rotationally
//! symmetric ball with area function `A`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::AreaFunction;
use crate::grid::RadialGrid;

/// Integrals below this are treated as underflow.
const UNDERFLOW_FLOOR: f64 = 1e-280;

#[derive(Debug, Clone)]
pub struct MomentTable {
    grid: RadialGrid,
    area: Vec<f64>,
    levels: Vec<Vec<f64>>,
    log_scale: Vec<f64>,
}

/// Table with levels `0..=max_level`.
pub fn compute_moments(area: &AreaFunction, grid: &RadialGrid, max_level: usize) -> Result<MomentTable> {
    let mut table = MomentTable::new(area, grid)?;
    for _ in 0..max_level {
        table.push_level()?;
    }
    Ok(table)
}

impl MomentTable {
    /// Table holding only `T_0 = 1`.
    pub fn new(area: &AreaFunction, grid: &RadialGrid) -> Result<Self> {
        let samples = area.samples(grid)?;
        Ok(Self {
            grid: grid.clone(),
            area: samples,
            levels: vec![vec![1.0; grid.nodes().len()]],
            log_scale: vec![0.0],
        })
    }

    /// Highest computed level `K`.
    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// Renormalized level `T̂_k`, with `T̂_k(0) = 1`.
    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }

    /// `s_k` with `T_k = exp(s_k) T̂_k`.
    pub fn log_scale(&self, k: usize) -> f64 {
        self.log_scale[k]
    }

    /// `T_k` at the grid nodes without renormalization. Underflows for large `k`.
    pub fn unscaled_level(&self, k: usize) -> Vec<f64> {
        let s = self.log_scale[k].exp();
        self.levels[k].iter().map(|v| v * s).collect()
    }

    /// Computes `T_{K+1}` from `T_K`.
    pub fn push_level(&mut self) -> Result<()> {
        let prev = self.levels.last().expect("level 0 always present");
        let weighted: Vec<f64> = prev.iter().zip(&self.area).map(|(t, a)| t * a).collect();
        let inner = self.grid.cumulative_from_start(&weighted);
        // (∫_0^σ T A) / A(σ) ~ σ T(0) / n vanishes at the center.
        let outer_integrand: Vec<f64> = inner
            .iter()
            .zip(&self.area)
            .enumerate()
            .map(|(i, (f, a))| if i == 0 { 0.0 } else { f / a })
            .collect();
        let mut next = self.grid.cumulative_to_end(&outer_integrand);
        let center = next[0];
        if !(center.is_finite() && center > 0.0) {
            return Err(Error::Precision(format!(
                "level {} has center value {center}",
                self.levels.len()
            )));
        }
        next.iter_mut().for_each(|v| *v /= center);
        let s = self.log_scale.last().unwrap() + center.ln();
        self.levels.push(next);
        self.log_scale.push(s);
        Ok(())
    }

    fn weighted_integral(&self, k: usize, power: i32) -> f64 {
        let f: Vec<f64> = self.levels[k]
            .iter()
            .zip(&self.area)
            .map(|(t, a)| t.powi(power) * a)
            .collect();
        self.grid.integrate(&f)
    }

    fn check_level(&self, k: usize, lowest: usize) -> Result<()> {
        if k < lowest || k > self.max_level() {
            return Err(Error::Domain(format!(
                "estimator level {k} outside {lowest}..={} of the table",
                self.max_level()
            )));
        }
        Ok(())
    }

    /// `(∫T_k² A / ∫T_{k+1}² A)^{1/2}`; needs `k + 1 ≤ K`.
    pub fn norm_ratio(&self, k: usize) -> Result<f64> {
        self.check_level(k + 1, 1)?;
        let num = self.weighted_integral(k, 2);
        let den = self.weighted_integral(k + 1, 2);
        if den < UNDERFLOW_FLOOR {
            return Err(Error::Precision(format!("∫T_{}² A = {den:e} underflowed", k + 1)));
        }
        Ok((self.log_scale[k] - self.log_scale[k + 1]).exp() * (num / den).sqrt())
    }

    /// `T_{k-1}(0) / T_k(0)`; needs `1 ≤ k ≤ K`.
    pub fn center_ratio(&self, k: usize) -> Result<f64> {
        self.check_level(k, 1)?;
        Ok((self.log_scale[k - 1] - self.log_scale[k]).exp() * self.levels[k - 1][0] / self.levels[k][0])
    }

    /// `∫T_{k-1} A / ∫T_k A`; needs `1 ≤ k ≤ K`.
    pub fn mass_ratio(&self, k: usize) -> Result<f64> {
        self.check_level(k, 1)?;
        let num = self.weighted_integral(k - 1, 1);
        let den = self.weighted_integral(k, 1);
        if den < UNDERFLOW_FLOOR {
            return Err(Error::Precision(format!("∫T_{k} A = {den:e} underflowed")));
        }
        Ok((self.log_scale[k - 1] - self.log_scale[k]).exp() * num / den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    NormRatio,
    CenterRatio,
    MassRatio,
}

/// Estimates indexed by the highest moment level they use: `values[j]`
/// uses levels up to `j + 1` (norm ratio at `j`, center and mass ratios at `j + 1`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateSeries {
    pub kind: EstimatorKind,
    pub values: Vec<f64>,
    pub converged: bool,
    #[serde(rename = "final")]
    pub final_value: f64,
    /// `|E(K) - E(K-1)| / E(K)` at the last level.
    pub last_relative_change: f64,
    /// Diagnostic only: whether every value lies at or above the final one.
    pub from_above: bool,
}

impl EstimateSeries {
    fn new(kind: EstimatorKind) -> Self {
        Self {
            kind,
            values: Vec::new(),
            converged: false,
            final_value: f64::NAN,
            last_relative_change: f64::INFINITY,
            from_above: false,
        }
    }

    fn push(&mut self, v: f64) {
        if let Some(&prev) = self.values.last() {
            self.last_relative_change = (v - prev).abs() / v.abs();
        }
        self.values.push(v);
        self.final_value = v;
    }

    fn finish(&mut self, tol: f64) {
        self.converged = self.values.len() >= 2 && self.last_relative_change <= tol;
        let f = self.final_value;
        self.from_above = self.values.iter().all(|&v| v >= f);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRun {
    pub norm: EstimateSeries,
    pub center: EstimateSeries,
    pub mass: EstimateSeries,
    pub levels: usize,
    pub tol: f64,
    /// Ratio of the last two successive changes of the center ratio, an
    /// empirical geometric convergence rate.
    pub observed_rate: Option<f64>,
}

impl ConvergenceRun {
    pub fn converged(&self) -> bool {
        self.norm.converged && self.center.converged && self.mass.converged
    }

    /// The norm-ratio limit, i.e. the eigenvalue upper bound.
    pub fn bound(&self) -> f64 {
        self.norm.final_value
    }

    /// Largest pairwise gap between the three finals.
    pub fn spread(&self) -> f64 {
        let f = [self.norm.final_value, self.center.final_value, self.mass.final_value];
        let hi = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = f.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

/// Adds levels until all three estimators pass the relative Cauchy test
/// `|E(k) - E(k-1)| ≤ tol E(k)`, or `k_max` levels are reached.
pub fn run_until_converged(area: &AreaFunction, grid: &RadialGrid, tol: f64, k_max: usize) -> Result<ConvergenceRun> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if k_max < 2 {
        return Err(Error::Domain(format!("at least 2 levels required, got {k_max}")));
    }
    let mut table = MomentTable::new(area, grid)?;
    table.push_level()?;
    let mut norm = EstimateSeries::new(EstimatorKind::NormRatio);
    let mut center = EstimateSeries::new(EstimatorKind::CenterRatio);
    let mut mass = EstimateSeries::new(EstimatorKind::MassRatio);
    norm.push(table.norm_ratio(0)?);
    center.push(table.center_ratio(1)?);
    mass.push(table.mass_ratio(1)?);

    for k in 2..=k_max {
        table.push_level()?;
        norm.push(table.norm_ratio(k - 1)?);
        center.push(table.center_ratio(k)?);
        mass.push(table.mass_ratio(k)?);
        let done = [&norm, &center, &mass]
            .iter()
            .all(|s| s.values.len() >= 2 && s.last_relative_change <= tol);
        if done {
            break;
        }
    }
    for s in [&mut norm, &mut center, &mut mass] {
        s.finish(tol);
    }
    let observed_rate = {
        let v = &center.values;
        let n = v.len();
        (n >= 3 && v[n - 2] != v[n - 3]).then(|| ((v[n - 1] - v[n - 2]) / (v[n - 2] - v[n - 3])).abs())
    };
    Ok(ConvergenceRun {
        norm,
        center,
        mass,
        levels: table.max_level(),
        tol,
        observed_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin::{self, euclidean_disc_lambda1};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn disc(n: usize) -> (AreaFunction, RadialGrid) {
        let area = builtin::euclidean(2, 1.0).unwrap().area().unwrap();
        (area, RadialGrid::uniform(1.0, n).unwrap())
    }

    // Hand integration of the recursion for A(t) = 2πt, R = 1:
    //   T_1(t) = (1 - t²)/4,  T_2(t) = (3 - 4t² + t⁴)/64.
    #[test]
    fn first_levels_match_symbolic_integration() {
        let (area, grid) = disc(4096);
        let table = compute_moments(&area, &grid, 2).unwrap();
        assert!(table.level(0).iter().all(|&v| v == 1.0));
        let t1 = table.unscaled_level(1);
        let t2 = table.unscaled_level(2);
        for (i, &t) in grid.nodes().iter().enumerate() {
            assert!((t1[i] - (1.0 - t * t) / 4.0).abs() < 1e-8);
            assert!((t2[i] - (3.0 - 4.0 * t * t + t.powi(4)) / 64.0).abs() < 1e-8);
        }
        assert!((t2[0] - 3.0 / 64.0).abs() < 1e-8);
        assert!((table.center_ratio(2).unwrap() - 16.0 / 3.0).abs() < 1e-8);
        assert!((table.center_ratio(1).unwrap() - 1.0 / t1[0]).abs() < 1e-12);
        // ∫2πt dt / ∫2πt (1 - t²)/4 dt = π / (π/8)
        assert!((table.mass_ratio(1).unwrap() - 8.0).abs() < 1e-8);
    }

    #[test]
    fn level_range_is_checked() {
        let (area, grid) = disc(64);
        let table = compute_moments(&area, &grid, 3).unwrap();
        assert!(table.center_ratio(0).is_err());
        assert!(table.center_ratio(4).is_err());
        assert!(table.norm_ratio(3).is_err());
        assert!(table.norm_ratio(2).is_ok());
        let empty = compute_moments(&area, &grid, 0).unwrap();
        assert_eq!(empty.max_level(), 0);
        assert!(empty.mass_ratio(1).is_err());
    }

    #[test]
    fn renormalization_survives_deep_recursion() {
        let (area, grid) = disc(256);
        let table = compute_moments(&area, &grid, 600).unwrap();
        assert!(table.log_scale(600) < -700.0 * 10f64.ln() / 2.0);
        let l = euclidean_disc_lambda1(1.0);
        assert!((table.center_ratio(600).unwrap() - l).abs() < 1e-6);
        assert!((table.norm_ratio(599).unwrap() - l).abs() < 1e-6);
    }

    #[test]
    fn interior_zero_area_is_rejected() {
        let area = AreaFunction::closed_form(2, 1.0, |t| 2.0 * PI * t * (t - 0.5).abs()).unwrap();
        let grid = RadialGrid::uniform(1.0, 64).unwrap();
        assert!(matches!(compute_moments(&area, &grid, 2), Err(Error::InvalidArea(_))));
    }

    #[test]
    fn disc_converges_to_bessel_zero() {
        let (area, grid) = disc(4096);
        let run = run_until_converged(&area, &grid, 1e-6, 200).unwrap();
        assert!(run.converged());
        let l = euclidean_disc_lambda1(1.0);
        for s in [&run.norm, &run.center, &run.mass] {
            assert!((s.final_value - l).abs() < 1e-3);
        }
        assert!(run.spread() <= 5e-6);
    }

    #[test]
    fn hemisphere_mass_ratio() {
        let area = builtin::spherical(2, 1.0, FRAC_PI_2).unwrap().area().unwrap();
        let grid = RadialGrid::uniform(FRAC_PI_2, 4096).unwrap();
        let run = run_until_converged(&area, &grid, 1e-10, 200).unwrap();
        assert!((run.mass.final_value - 2.0).abs() < 1e-6);
    }

    #[test]
    fn unconverged_runs_are_flagged() {
        let (area, grid) = disc(64);
        let run = run_until_converged(&area, &grid, 1e-15, 3).unwrap();
        assert!(!run.converged());
        assert_eq!(run.levels, 3);
        assert_eq!(run.center.values.len(), 3);
        assert_eq!(run.norm.values.len(), 3);
        assert_eq!(run.mass.values.len(), 3);
        assert!(run_until_converged(&area, &grid, 0.0, 10).is_err());
        assert!(run_until_converged(&area, &grid, 1e-6, 1).is_err());
    }
}
