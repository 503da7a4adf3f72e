//! Replica-exchange Langevin samplers for multimodal targets, together with
//! the explicit Poincaré-constant bounds they come with and the diagnostics
//! used to measure their mixing.
//!
//! The numerical core is generic over [`scalar::Real`] (`f32` or `f64`).
//! The aliases below fix `f64`, which is what the harness uses.

// `!(x > 0)` is the NaN-rejecting form of `x <= 0`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod densities;
pub mod diagnostics;
pub mod dynamics;
pub mod scalar;
pub mod theory;

pub use scalar::Real;

pub type Mixture = densities::MixtureDensity<f64>;
pub type Tempered = densities::TemperedDensity<f64>;
pub type Gaussian = densities::GaussianReference<f64>;
pub type Log = theory::LogScalar<f64>;
pub type Bound = theory::GapBound<f64>;
pub type Ladder = theory::LadderSpec<f64>;
