//! Batch experiment runner for `pesinlab-core`.
//!
//! Every subcommand reads a [`LabConfig`], builds the configured system and
//! measures, runs its experiment and returns an [`ExperimentReport`] that
//! can be written as CSV and/or JSON. Numeric output depends only on the
//! config and the seed, never on the worker count.

pub mod commands;
pub mod config;
pub mod parallel;
pub mod report;
pub mod setup;

pub use commands::{run_command, Command};
pub use config::LabConfig;
pub use report::{Cell, ExperimentReport, Table};

/// Failure classes, each with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("experiment infeasible: {0}")]
    Infeasible(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Infeasible(_) => 3,
            _ => 2,
        }
    }
}

impl From<pesinlab_core::Error> for LabError {
    fn from(e: pesinlab_core::Error) -> Self {
        LabError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

/// Settings resolved from the config and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: u64,
    pub workers: usize,
}
