use std::path::PathBuf;

use kcover::{ConfigError, MetricsError};
use thiserror::Error;

/// Process exit codes. Clap usage errors exit with 2 on their own.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VERIFY_FAILED: i32 = 1;
    pub const CONFIG: i32 = 3;
    pub const IO: i32 = 4;
    pub const DATA: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("{path}: {message}")]
    ConfigFile { path: PathBuf, message: String },
    #[error("invalid experiment: {0}")]
    Experiment(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ConfigFile { .. } | CliError::Experiment(_) => exit::CONFIG,
            CliError::Io { .. } => exit::IO,
            CliError::Parse { .. } | CliError::Metrics(_) => exit::DATA,
        }
    }
}
