use thiserror::Error;

use crate::expr::EvalError;

/// Errors raised by the geometry, moment, oracle and comparison layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid area function: {0}")]
    InvalidArea(String),

    #[error("invalid warping function: {0}")]
    InvalidModel(String),

    #[error("invalid metric: {0}")]
    InvalidMetric(String),

    #[error("precision loss: {0}; raise the level count or the grid size")]
    Precision(String),

    #[error("eigenvalue bracket [{lo}, {hi}] failed: {detail}")]
    Bracket { lo: f64, hi: f64, detail: String },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("assembled operator is not symmetric (relative asymmetry {asymmetry:e})")]
    Assembly { asymmetry: f64 },

    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),

    #[error("comparison bound violated: bound {bound} exceeds reference {reference} by more than {tolerance:e}")]
    BoundViolated { bound: f64, reference: f64, tolerance: f64 },

    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T> = std::result::Result<T, Error>;
