use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// A stage ran but did not converge (moment estimators or inverse iteration).
    pub const UNCONVERGED: u8 = 1;
    /// Bad flags, unreadable config, expression syntax errors.
    pub const USAGE: u8 = 2;
    /// Invalid model or numerical failure.
    pub const NUMERICAL: u8 = 3;
    /// Output could not be written.
    pub const IO: u8 = 4;
    /// The comparison hypothesis held but the bound exceeded the reference.
    pub const BOUND_VIOLATED: u8 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config {path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{stage}: {source}")]
    Numerical {
        stage: &'static str,
        #[source]
        source: eigenbound::Error,
    },

    #[error("writing {what}: {source}")]
    Io {
        what: String,
        #[source]
        source: std::io::Error,
    },

    #[error("encoding report: {0}")]
    Encode(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => exit::USAGE,
            CliError::Numerical { source, .. } => match source {
                eigenbound::Error::Convergence { .. } => exit::UNCONVERGED,
                eigenbound::Error::BoundViolated { .. } => exit::BOUND_VIOLATED,
                _ => exit::NUMERICAL,
            },
            CliError::Io { .. } | CliError::Encode(_) => exit::IO,
        }
    }
}

/// Attaches the pipeline stage name to a library error.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> StageExt<T> for eigenbound::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { stage, source })
    }
}
