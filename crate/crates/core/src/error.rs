use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("dataset not found: {0}")]
    DatasetMissing(PathBuf),

    #[error("config: {0}")]
    Config(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(context: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            found,
        }
    }

    /// Short machine-readable category, used by the CLI for its error line.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => "invalid-argument",
            Error::Parse { .. } => "parse",
            Error::DatasetMissing(_) => "dataset-missing",
            Error::Config(_) => "config",
            Error::Checkpoint(_) => "checkpoint",
            Error::Io(_) | Error::Csv(_) => "io",
        }
    }
}
