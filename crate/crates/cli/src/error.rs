use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Failures of a CLI verb, each tied to one process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },

    #[error("solver failure: {0}")]
    Solver(#[from] conductance_spectrum::Error),

    #[error("all {rows} sweep rows failed")]
    AllRowsFailed { rows: usize },
}

impl CliError {
    pub const EXIT_USAGE: i32 = 2;
    pub const EXIT_IO: i32 = 3;
    pub const EXIT_SOLVER: i32 = 4;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => Self::EXIT_USAGE,
            CliError::Io { .. } | CliError::Input { .. } => Self::EXIT_IO,
            CliError::Solver(_) | CliError::AllRowsFailed { .. } => Self::EXIT_SOLVER,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
