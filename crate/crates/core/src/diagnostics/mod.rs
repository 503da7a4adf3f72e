//! Relaxation-rate estimates and stationarity checks.
//!
//! Three routes to `κ`: the integrated autocorrelation time of a test
//! function along a run, the Rayleigh quotient `var(f)/ℰ(f)` under the exact
//! carré du champ, and first-passage times between modes. Only the Rayleigh
//! quotient is a guaranteed lower bound, and only for the chosen `f`.

mod first_passage;
mod gof;
mod iat;
mod quadrature;
mod rayleigh;
mod stationarity;
mod test_function;

pub use first_passage::{first_passage_time, PassageOptions, PassageProcess, PassageResult};
pub use gof::{kolmogorov_sf, ks_one_sample, ks_two_sample, pearson_chisq, TestOutcome};
pub use iat::{autocorrelation, integrated_autocorr_time, IatEstimate, IatMethod, MIN_SERIES};
pub use quadrature::{integrate, QuadratureResult};
pub use rayleigh::{rayleigh_kappa, ExchangeConvention, Generator, RayleighEstimator};
pub use stationarity::{
    grad_check, mode_occupancy, normalization_1d, stationarity_chisq, thin_by_iat, ChiSquareOutcome, Occupancy,
};
pub use test_function::{Coordinate, CustomTestFunction, SmoothedModeIndicator, TestFunction, TestFunctionKind};

use crate::densities::DensityError;
use crate::dynamics::DynamicsError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("series is constant; autocorrelation is undefined")]
    ConstantSeries,
    #[error("Dirichlet form is zero: the test function is constant in law")]
    ZeroDirichletForm,
    #[error("capture balls overlap")]
    OverlappingCaptureBalls,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Density(#[from] DensityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateMethod {
    Iat,
    Rayleigh,
    FirstPassage,
}

/// One empirical `κ` estimate, serialized as a diagnostics record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub kappa_hat: f64,
    pub method: EstimateMethod,
    pub ci: (f64, f64),
    pub confidence: f64,
    pub se: Option<f64>,
    pub test_function: String,
    /// `None` for quadrature estimates, which use no samples.
    pub n_effective: Option<f64>,
    pub numerator: Option<f64>,
    pub denominator: Option<f64>,
    pub params: serde_json::Value,
}

/// `κ̂ = IAT · Δt / 2`, the relaxation time of `f` implied by an IAT
/// measured on a series sampled every `dt` time units.
pub fn gap_from_iat(series: &[f64], dt: f64, method: IatMethod, test_function: &str) -> Result<GapEstimate, DiagnosticsError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DiagnosticsError::InvalidParameter(format!("sampling interval must be positive, got {dt}")));
    }
    let e = integrated_autocorr_time(series, method)?;
    let kappa = e.iat * dt / 2.0;
    let se = e.se * dt / 2.0;
    Ok(GapEstimate {
        kappa_hat: kappa,
        method: EstimateMethod::Iat,
        ci: ((kappa - 1.96 * se).max(0.0), kappa + 1.96 * se),
        confidence: 0.95,
        se: Some(se),
        test_function: test_function.to_string(),
        n_effective: Some(e.n_effective()),
        numerator: None,
        denominator: None,
        params: serde_json::json!({"iat": e.iat, "iat_se": e.se, "lag": e.lag, "n": e.n, "dt": dt, "method": method}),
    })
}
