//! Command-line driver: ingestion, training, evaluation, significance tests
//! and exports, each run leaving a manifest next to its outputs.

pub mod args;
mod commands;
mod config;
mod manifest;

use thiserror::Error;

pub use args::Cli;
pub use commands::run;
pub use config::parse_config;
pub use manifest::{sha256_file, RunManifest};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] syge::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    /// 0 success, 1 computation error, 2 usage or I/O error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_usage_or_io() => 2,
            CliError::Core(_) | CliError::Compute(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
