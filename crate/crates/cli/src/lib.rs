//! Config-driven runs of the `ati-core` pipeline with CSV/JSON outputs.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use ati_core::AtiError;
use thiserror::Error;

pub use config::{Overrides, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(AtiError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{} gate(s) failed: {}", .0.len(), .0.join(", "))]
    Gates(Vec<String>),
}

impl From<AtiError> for CliError {
    fn from(e: AtiError) -> Self {
        match e {
            AtiError::InvalidParameter { name, reason } => CliError::Config(format!("{name}: {reason}")),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    /// 0 ok, 1 config or I/O, 2 gate failure, 3 failure budget exceeded.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Gates(_) => 2,
            CliError::Core(AtiError::FailureBudgetExceeded { .. }) => 3,
            _ => 1,
        }
    }
}
