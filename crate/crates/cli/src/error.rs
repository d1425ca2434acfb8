use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Failures after argument parsing; each maps to one exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Range(String),

    #[error("cache {path}: {source}")]
    Cache { path: PathBuf, source: io::Error },

    #[error("numeric failure: {0}")]
    Numeric(planepart::Error),

    #[error("writing output: {0}")]
    Output(#[from] io::Error),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RANGE: i32 = 3;
pub const EXIT_CACHE: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Range(_) => EXIT_RANGE,
            CliError::Cache { .. } => EXIT_CACHE,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Output(_) => EXIT_OUTPUT,
        }
    }
}

impl From<planepart::Error> for CliError {
    fn from(e: planepart::Error) -> Self {
        match e {
            planepart::Error::OutOfRange { .. } => CliError::Range(e.to_string()),
            other => CliError::Numeric(other),
        }
    }
}
