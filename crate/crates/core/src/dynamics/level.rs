use super::DynamicsError;
use crate::densities::{GaussianReference, MixtureDensity, Target, TemperedDensity};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// The stationary density of one replica.
#[derive(Clone)]
pub enum LevelDensity<T: Real> {
    Mixture(Arc<MixtureDensity<T>>),
    Tempered(TemperedDensity<T>),
    Gaussian(GaussianReference<T>),
    Custom(Arc<dyn Target<T>>),
}

impl<T: Real> std::fmt::Debug for LevelDensity<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.describe())
    }
}

impl<T: Real> LevelDensity<T> {
    pub fn describe(&self) -> String {
        match self {
            LevelDensity::Mixture(m) => format!("mixture({} components)", m.components().len()),
            LevelDensity::Tempered(t) => match t.regularizer() {
                Some(m) => format!("tempered(beta={}, M={})", t.beta(), m),
                None => format!("tempered(beta={})", t.beta()),
            },
            LevelDensity::Gaussian(g) => format!("gaussian(M={})", g.scale()),
            LevelDensity::Custom(_) => "custom".into(),
        }
    }

    /// Upper bound on the Hessian norm of `-log π_k`, when known.
    pub fn hessian_bound(&self) -> Option<T> {
        match self {
            LevelDensity::Mixture(m) => Some(m.hessian_bound()),
            LevelDensity::Tempered(t) => {
                let reg = t.regularizer().map(|m| (m * m).recip()).unwrap_or(T::zero());
                Some(t.beta() * t.base().hessian_bound() + reg)
            }
            LevelDensity::Gaussian(g) => Some((g.scale() * g.scale()).recip()),
            LevelDensity::Custom(_) => None,
        }
    }
}

impl<T: Real> Target<T> for LevelDensity<T> {
    fn dim(&self) -> usize {
        match self {
            LevelDensity::Mixture(m) => m.dim(),
            LevelDensity::Tempered(t) => t.dim(),
            LevelDensity::Gaussian(g) => g.dim(),
            LevelDensity::Custom(c) => c.dim(),
        }
    }

    #[inline]
    fn log_density_unchecked(&self, x: &[T]) -> T {
        match self {
            LevelDensity::Mixture(m) => m.log_density_unchecked(x),
            LevelDensity::Tempered(t) => t.log_density_unchecked(x),
            LevelDensity::Gaussian(g) => g.log_density_unchecked(x),
            LevelDensity::Custom(c) => c.log_density_unchecked(x),
        }
    }

    #[inline]
    fn grad_log_density_into(&self, x: &[T], out: &mut [T]) {
        match self {
            LevelDensity::Mixture(m) => m.grad_log_density_into(x, out),
            LevelDensity::Tempered(t) => t.grad_log_density_into(x, out),
            LevelDensity::Gaussian(g) => g.grad_log_density_into(x, out),
            LevelDensity::Custom(c) => c.grad_log_density_into(x, out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    #[default]
    Em,
    ExactOu,
}

/// One replica: density, temperature and integrator.
#[derive(Debug, Clone)]
pub struct Level<T: Real> {
    pub density: LevelDensity<T>,
    pub tau: T,
    pub kernel: Kernel,
}

impl<T: Real> Level<T> {
    pub fn new(density: LevelDensity<T>, tau: T, kernel: Kernel) -> Result<Self, DynamicsError> {
        if !(tau > T::zero() && tau.is_finite()) {
            return Err(DynamicsError::InvalidParameter { name: "tau", value: tau.as_f64(), reason: "must be positive" });
        }
        if kernel == Kernel::ExactOu && !matches!(density, LevelDensity::Gaussian(_)) {
            return Err(DynamicsError::ExactOuUnavailable { density: density.describe() });
        }
        Ok(Self { density, tau, kernel })
    }

    pub fn em(density: LevelDensity<T>, tau: T) -> Result<Self, DynamicsError> {
        Self::new(density, tau, Kernel::Em)
    }

    /// `τ_k` times the Hessian bound: the stiffness the integrator sees.
    pub fn stiffness(&self) -> Option<T> {
        if self.kernel == Kernel::ExactOu {
            return None;
        }
        self.density.hessian_bound().map(|l| l * self.tau)
    }
}
