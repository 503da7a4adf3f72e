//! Langevin, replica-exchange and multi-replica-exchange simulation.
//!
//! Replicas exchange positions, never temperatures, so replica 0 always
//! samples the target.

mod engine;
mod kernels;
mod level;
mod rng;
mod trajectory;

pub use engine::{
    default_step, ladder_levels, run_ld, run_mreld, run_reld, ClockMode, ReplicaSystem, SystemOptions,
};
pub use kernels::{em_step, ou_exact_step, swap_probability};
pub use level::{Kernel, Level, LevelDensity};
pub use rng::{Stream, Streams};
pub use trajectory::{PairStats, RecordPolicy, ShadowStats, SwapStats, Trajectory};

use crate::densities::DensityError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite drift at replica {replica}, t = {time}, x = {x:?}; the step size is likely too large")]
    NonFiniteDrift { replica: usize, time: f64, x: Vec<f64> },
    #[error("replica {replica} diverged at t = {time} (|x| = {norm}); state = {state:?}")]
    Divergence {
        replica: usize,
        time: f64,
        norm: f64,
        state: Vec<Vec<f64>>,
    },
    #[error("exact OU kernel needs a pure Gaussian level, got {density}")]
    ExactOuUnavailable { density: String },
    #[error("NaN log-density in swap probability")]
    NanSwapInput,
    #[error("ladder mismatch: {0}")]
    LadderMismatch(String),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("i/o: {0}")]
    Io(String),
}
