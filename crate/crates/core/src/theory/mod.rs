//! Closed-form constants, Lyapunov certificates, Poincaré bounds and
//! temperature ladders. Values that can overflow `f64` are [`LogScalar`]s.
//!
//! `κ` is always the Poincaré constant, `var(f) ≤ κ·ℰ(f)`.

mod assemble;
mod bounds;
mod certs;
mod ladder;
mod log_scalar;
mod piy;

pub use assemble::{mreld_bound_for_ladder, reld_bound_for_mixture, HolderSplit};
pub use bounds::{
    kappa_mreld_bound, kappa_mreld_bound_default, kappa_reld_bound, ld_lower_bound_bimodal, optimize_holder,
    reld_order, xi_constants, BindingTerm, BoundInputs, BoundVariant, GapBound, LevelConstants, MreldBoundInputs,
    ReldBoundInputs, XiConstants, XiYConvention,
};
pub use certs::{
    holley_stroock, ln_unit_ball_volume, ly_a_from_cert, lyapunov_cert_log_concave, tempered_cert, unit_ball_volume,
    LyDensityParams, LyapunovCert, TemperedCert,
};
pub use ladder::{build_ladder, LadderSpec, Scenario};
pub use log_scalar::{LogScalar, Sign};
pub use piy::{gaussian_tempered_beta_threshold, piy_constants, tempered_beta, PiYChoice, PiYConstants};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("dimension must be at least 1, got {0}")]
    InvalidDimension(usize),
    #[error("invalid {name} = {value}: {reason}")]
    InvalidInput {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("missing input: {0}")]
    MissingInput(&'static str),
    #[error("beta = {beta} exceeds the admissible threshold {threshold}")]
    BetaAboveThreshold { beta: f64, threshold: f64 },
    #[error("eps = {eps} exceeds the admissible threshold {threshold}")]
    EpsAboveThreshold { eps: f64, threshold: f64 },
    #[error("radius order violated: outer radius {outer} < inner radius {inner}")]
    RadiusOrder { outer: f64, inner: f64 },
    #[error("malformed levels: {0}")]
    MalformedLevels(String),
    #[error("scenario {scenario} needs {requirement}, got d = {d}")]
    ScenarioDimension {
        scenario: &'static str,
        d: usize,
        requirement: &'static str,
    },
}
