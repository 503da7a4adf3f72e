//! Unnormalized target densities: Gaussian and double-well mixtures, tempered
//! and Gaussian-regularized versions of them, and the pure Gaussian reference
//! `φ(x/M)` used as the auxiliary level of replica exchange.
//!
//! Everything is evaluated in log-space. A component with scale 0.05 is below
//! `e^{-200}` a few units off its mode, so plain densities would underflow.

mod component;
mod mixture;
mod tempered;

pub use component::{Component, ComponentKind, Concavity, Side};
pub use mixture::{make_double_well, make_gaussian_mixture, MixtureDensity};
pub use tempered::{GaussianReference, TemperedDensity};

use crate::scalar::Real;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite coordinate in evaluation point")]
    NonFiniteInput,
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("scale of component {index} must be positive, got {value}")]
    NonPositiveScale { index: usize, value: f64 },
    #[error("weights are not a probability vector: {0}")]
    InvalidWeights(String),
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("mode bound {bound} is smaller than the largest mode norm {required}")]
    ModeBoundTooSmall { bound: f64, required: f64 },
    #[error("component {index} is not Gaussian; exact sampling is unavailable")]
    NonGaussianComponent { index: usize },
}

/// An unnormalized log-density with an analytic gradient.
///
/// The `*_unchecked` entry points skip validation and are what the samplers
/// call in their inner loops; `log_density` / `grad_log_density` validate
/// the dimension and reject non-finite input.
pub trait Target<T: Real>: Send + Sync {
    fn dim(&self) -> usize;

    fn log_density_unchecked(&self, x: &[T]) -> T;

    fn grad_log_density_into(&self, x: &[T], out: &mut [T]);

    fn log_density(&self, x: &[T]) -> Result<T, DensityError> {
        check_point(x, self.dim())?;
        Ok(self.log_density_unchecked(x))
    }

    fn grad_log_density(&self, x: &[T]) -> Result<Vec<T>, DensityError> {
        check_point(x, self.dim())?;
        let mut out = vec![T::zero(); x.len()];
        self.grad_log_density_into(x, &mut out);
        Ok(out)
    }
}

pub(crate) fn check_point<T: Real>(x: &[T], dim: usize) -> Result<(), DensityError> {
    if x.len() != dim {
        return Err(DensityError::DimensionMismatch {
            expected: dim,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(DensityError::NonFiniteInput);
    }
    Ok(())
}

impl<T: Real, D: Target<T> + ?Sized> Target<T> for std::sync::Arc<D> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_density_unchecked(&self, x: &[T]) -> T {
        (**self).log_density_unchecked(x)
    }
    fn grad_log_density_into(&self, x: &[T], out: &mut [T]) {
        (**self).grad_log_density_into(x, out)
    }
}
