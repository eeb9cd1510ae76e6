use std::collections::BTreeMap;
use std::io::Write;

use eigenbound::compare::ComparisonReport;
use eigenbound::moments::ConvergenceRun;
use serde::Serialize;

use crate::config::ModelConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Settings {
    pub grid: usize,
    pub theta: usize,
    pub kmax: usize,
    pub tol: f64,
    pub mesh: [usize; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub model: Option<ModelConfig>,
    pub settings: Settings,
}

/// Per-level estimator values; entry `j` uses moment levels up to `j + 1`.
#[derive(Debug, Clone, Serialize)]
pub struct Series {
    pub norm: Vec<f64>,
    pub center: Vec<f64>,
    pub mass: Vec<f64>,
    pub levels: usize,
    pub tol: f64,
    pub converged: bool,
    pub finals: [f64; 3],
    /// Whether every value of each series lies at or above its final value.
    pub from_above: [bool; 3],
    pub spread: f64,
    pub observed_rate: Option<f64>,
}

impl From<&ConvergenceRun> for Series {
    fn from(run: &ConvergenceRun) -> Self {
        Self {
            norm: run.norm.values.clone(),
            center: run.center.values.clone(),
            mass: run.mass.values.clone(),
            levels: run.levels,
            tol: run.tol,
            converged: run.converged(),
            finals: [run.norm.final_value, run.center.final_value, run.mass.final_value],
            from_above: [run.norm.from_above, run.center.from_above, run.mass.from_above],
            spread: run.spread(),
            observed_rate: run.observed_rate,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMethod {
    RadialShooting,
    PolarFiniteVolume,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub method: OracleMethod,
    pub lambda1: f64,
    /// Discretization error estimate from the run at half resolution.
    pub richardson: f64,
    pub coarse_lambda1: f64,
    pub extrapolated: f64,
    pub residual: f64,
    pub iterations: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetrizeTable {
    pub t: Vec<f64>,
    pub area: Vec<f64>,
    pub omega: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PaperExample {
    pub radius: f64,
    /// `max |A(t) - 2πt|` over the grid.
    pub area_error: f64,
    /// `j₀²/R²`, the eigenvalue of the flat disc.
    pub canonical_lambda1: f64,
    pub bound: f64,
    pub oracle_lambda1: f64,
    pub richardson: f64,
    /// `canonical_lambda1 - oracle_lambda1`.
    pub gap: f64,
    pub strict_inequality: bool,
    pub radiality: f64,
    pub equality: bool,
}

/// Keys `config`, `series`, `bound`, `oracle`, `comparison` and `timings`
/// are always present (null when a stage did not run).
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: &'static str,
    pub config: ConfigEcho,
    pub series: Option<Series>,
    pub bound: Option<f64>,
    pub oracle: Option<OracleReport>,
    pub comparison: Option<ComparisonReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symmetrize: Option<SymmetrizeTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paper_example: Option<PaperExample>,
    /// Wall time per stage in seconds.
    pub timings: BTreeMap<&'static str, f64>,
}

impl RunReport {
    pub fn new(command: &'static str, config: ConfigEcho) -> Self {
        Self {
            command,
            config,
            series: None,
            bound: None,
            oracle: None,
            comparison: None,
            symmetrize: None,
            paper_example: None,
            timings: BTreeMap::new(),
        }
    }

    /// Whether every stage that ran converged.
    pub fn converged(&self) -> bool {
        self.series.as_ref().is_none_or(|s| s.converged) && self.comparison.as_ref().is_none_or(|c| c.bound_converged)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), CliError> {
        serde_json::to_writer_pretty(&mut out, self).map_err(|e| CliError::Encode(e.to_string()))?;
        writeln!(out).map_err(|e| io("report", e))
    }

    /// The main table of the report as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        let enc = |e: csv::Error| CliError::Encode(e.to_string());
        if let Some(table) = &self.symmetrize {
            w.write_record(["t", "area", "omega"]).map_err(enc)?;
            for i in 0..table.t.len() {
                w.serialize((table.t[i], table.area[i], table.omega[i])).map_err(enc)?;
            }
        } else if let Some(s) = &self.series {
            w.write_record(["k", "norm_ratio", "center_ratio", "mass_ratio"])
                .map_err(enc)?;
            for j in 0..s.center.len() {
                w.serialize((j + 1, s.norm[j], s.center[j], s.mass[j])).map_err(enc)?;
            }
        } else if let Some(c) = &self.comparison {
            w.write_record(["i", "ratio"]).map_err(enc)?;
            for (i, q) in c.ratio_profile.iter().enumerate() {
                w.serialize((i, q)).map_err(enc)?;
            }
        } else if let Some(o) = &self.oracle {
            w.write_record([
                "lambda1",
                "richardson",
                "coarse_lambda1",
                "extrapolated",
                "residual",
                "iterations",
            ])
            .map_err(enc)?;
            w.serialize((
                o.lambda1,
                o.richardson,
                o.coarse_lambda1,
                o.extrapolated,
                o.residual,
                o.iterations,
            ))
            .map_err(enc)?;
        } else {
            return Err(CliError::Usage(format!("`{}` has no tabular output", self.command)));
        }
        w.flush().map_err(|e| io("report", e))
    }
}

pub fn io(what: &str, source: std::io::Error) -> CliError {
    CliError::Io {
        what: what.to_string(),
        source,
    }
}
