use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("classification mismatch: {0}")]
    Classification(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code reported by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::InvalidSurface(_) | Error::Config(_) => 2,
            Error::Classification(_) | Error::Domain(_) => 3,
            Error::Degenerate(_) => 4,
            Error::Io(_) | Error::Csv(_) => 1,
        }
    }

    /// Short machine-readable tag for the error category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::InvalidSurface(_) => "invalid-surface",
            Error::Config(_) => "config",
            Error::Classification(_) => "classification",
            Error::Domain(_) => "domain",
            Error::Degenerate(_) => "degenerate",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
