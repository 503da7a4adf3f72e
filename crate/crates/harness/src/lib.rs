//! Configuration-driven experiments: builds densities and ladders from a
//! TOML config, runs chains and diagnostics per sweep cell, and writes CSV,
//! JSON and SVG reports.

// `!(x > 0)` is the NaN-rejecting form of `x <= 0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod build;
pub mod cli;
pub mod config;
pub mod output;
pub mod report;
pub mod run;
pub mod svg;
pub mod sweep;

pub use config::{CellParams, ExperimentConfig};
pub use run::{run_experiment, CellRecord, CellStatus, ResultsBundle};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config at {path}: {message}")]
    Validation { path: String, message: String },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("sweep grid has {cells} cells, above the cap of {cap}")]
    GridTooLarge { cells: usize, cap: usize },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("nothing to report: {0}")]
    EmptyBundle(String),
    #[error("malformed input: {0}")]
    Input(String),
    #[error("run failed: {0}")]
    Runtime(String),
}

impl HarnessError {
    /// 1 for problems with the user's input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Validation { .. }
            | HarnessError::Parse(_)
            | HarnessError::GridTooLarge { .. }
            | HarnessError::Input(_) => 1,
            HarnessError::Io { .. } | HarnessError::EmptyBundle(_) | HarnessError::Runtime(_) => 2,
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        HarnessError::Io { path: path.display().to_string(), message: e.to_string() }
    }
}
