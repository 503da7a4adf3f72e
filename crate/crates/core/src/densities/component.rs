use super::{DensityError, Target};
use crate::scalar::Real;
use std::fmt;
use std::sync::Arc;

/// `(c, L)` log-concavity: `H = -log ν` is `c`-strongly convex with Hessian
/// operator norm at most `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Concavity<T> {
    pub c: T,
    pub l: T,
}

impl<T: Real> Concavity<T> {
    pub fn new(c: T, l: T) -> Result<Self, DensityError> {
        if !(c > T::zero()) {
            return Err(DensityError::InvalidParameter {
                name: "c",
                value: c.as_f64(),
                reason: "strong-convexity constant must be positive",
            });
        }
        if l < c {
            return Err(DensityError::InvalidParameter {
                name: "L",
                value: l.as_f64(),
                reason: "Hessian bound must be at least c",
            });
        }
        Ok(Self { c, l })
    }

    /// Condition number `L / c`.
    pub fn condition(&self) -> T {
        self.l / self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Support `x >= 0`.
    Positive,
    /// Support `x < 0`.
    Negative,
}

#[derive(Clone)]
pub enum ComponentKind<T: Real> {
    /// Axis-aligned Gaussian with per-coordinate standard deviations.
    Gaussian { std_devs: Vec<T> },
    /// `exp(-(n/2)(x² - a²)²)` restricted to one half-line.
    HalfDoubleWell { side: Side, n: T, a: T },
    Custom(Arc<dyn Target<T>>),
}

impl<T: Real> fmt::Debug for ComponentKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian { std_devs } => f.debug_struct("Gaussian").field("std_devs", std_devs).finish(),
            Self::HalfDoubleWell { side, n, a } => f
                .debug_struct("HalfDoubleWell")
                .field("side", side)
                .field("n", n)
                .field("a", a)
                .finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// One mixture component `ν_i` with its mode and optional log-concavity.
#[derive(Debug, Clone)]
pub struct Component<T: Real> {
    mode: Vec<T>,
    kind: ComponentKind<T>,
    concavity: Option<Concavity<T>>,
    // Gaussian caches
    inv_var: Vec<T>,
    log_norm: T,
}

impl<T: Real> Component<T> {
    /// Isotropic Gaussian `N(mode, scale² I)`, `(scale⁻², scale⁻²)`-log-concave.
    pub fn gaussian(mode: Vec<T>, scale: T) -> Result<Self, DensityError> {
        let d = mode.len();
        Self::gaussian_diag(mode, vec![scale; d])
    }

    /// Diagonal Gaussian. Log-concave with `c = 1/max σ²`, `L = 1/min σ²`.
    pub fn gaussian_diag(mode: Vec<T>, std_devs: Vec<T>) -> Result<Self, DensityError> {
        if mode.is_empty() {
            return Err(DensityError::LengthMismatch("component dimension must be at least 1".into()));
        }
        if std_devs.len() != mode.len() {
            return Err(DensityError::LengthMismatch(format!(
                "mode has {} coordinates but {} standard deviations were given",
                mode.len(),
                std_devs.len()
            )));
        }
        for &s in &std_devs {
            if !(s > T::zero()) || !s.is_finite() {
                return Err(DensityError::NonPositiveScale { index: 0, value: s.as_f64() });
            }
        }
        let max_s = std_devs.iter().copied().fold(T::zero(), T::max);
        let min_s = std_devs.iter().copied().fold(T::infinity(), T::min);
        let concavity = Concavity {
            c: (max_s * max_s).recip(),
            l: (min_s * min_s).recip(),
        };
        let d = T::from_usize_lossy(mode.len());
        let log_norm = -(d / T::lit(2.0)) * (T::TAU()).ln() - std_devs.iter().map(|s| s.ln()).sum::<T>();
        let inv_var = std_devs.iter().map(|&s| (s * s).recip()).collect();
        Ok(Self {
            mode,
            kind: ComponentKind::Gaussian { std_devs },
            concavity: Some(concavity),
            inv_var,
            log_norm,
        })
    }

    pub fn half_double_well(side: Side, n: T, a: T) -> Result<Self, DensityError> {
        if !(n > T::zero()) {
            return Err(DensityError::InvalidParameter { name: "n", value: n.as_f64(), reason: "must be positive" });
        }
        if !(a > T::zero()) {
            return Err(DensityError::InvalidParameter { name: "a", value: a.as_f64(), reason: "must be positive" });
        }
        let mode = match side {
            Side::Positive => a,
            Side::Negative => -a,
        };
        Ok(Self {
            mode: vec![mode],
            kind: ComponentKind::HalfDoubleWell { side, n, a },
            concavity: None,
            inv_var: Vec::new(),
            log_norm: T::zero(),
        })
    }

    pub fn custom(
        mode: Vec<T>,
        density: Arc<dyn Target<T>>,
        concavity: Option<Concavity<T>>,
    ) -> Result<Self, DensityError> {
        if density.dim() != mode.len() {
            return Err(DensityError::DimensionMismatch { expected: density.dim(), got: mode.len() });
        }
        if let Some(cv) = concavity {
            Concavity::new(cv.c, cv.l)?;
        }
        Ok(Self { mode, kind: ComponentKind::Custom(density), concavity, inv_var: Vec::new(), log_norm: T::zero() })
    }

    pub fn mode(&self) -> &[T] {
        &self.mode
    }

    pub fn kind(&self) -> &ComponentKind<T> {
        &self.kind
    }

    pub fn concavity(&self) -> Option<Concavity<T>> {
        self.concavity
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.kind, ComponentKind::Gaussian { .. })
    }

    /// Characteristic width: largest standard deviation for Gaussians, the
    /// local Gaussian width `1/(2a√n)` for a double-well half, `c^{-1/2}`
    /// (or 1) otherwise.
    pub fn width(&self) -> T {
        match &self.kind {
            ComponentKind::Gaussian { std_devs } => std_devs.iter().copied().fold(T::zero(), T::max),
            ComponentKind::HalfDoubleWell { n, a, .. } => (T::lit(2.0) * *a * n.sqrt()).recip(),
            ComponentKind::Custom(_) => self.concavity.map(|c| c.c.sqrt().recip()).unwrap_or_else(T::one),
        }
    }

    /// Smallest width; for Gaussians the smallest standard deviation.
    pub fn min_width(&self) -> T {
        match &self.kind {
            ComponentKind::Gaussian { std_devs } => std_devs.iter().copied().fold(T::infinity(), T::min),
            _ => self.width(),
        }
    }

    #[inline]
    pub(crate) fn accumulate_grad(&self, x: &[T], weight: T, out: &mut [T]) {
        match &self.kind {
            ComponentKind::Gaussian { .. } => {
                for j in 0..x.len() {
                    out[j] -= weight * (x[j] - self.mode[j]) * self.inv_var[j];
                }
            }
            ComponentKind::HalfDoubleWell { n, a, .. } => {
                let v = x[0];
                out[0] -= weight * T::lit(2.0) * *n * v * (v * v - *a * *a);
            }
            ComponentKind::Custom(t) => {
                let mut tmp = vec![T::zero(); x.len()];
                t.grad_log_density_into(x, &mut tmp);
                for j in 0..x.len() {
                    out[j] += weight * tmp[j];
                }
            }
        }
    }
}

impl<T: Real> Target<T> for Component<T> {
    fn dim(&self) -> usize {
        self.mode.len()
    }

    #[inline]
    fn log_density_unchecked(&self, x: &[T]) -> T {
        match &self.kind {
            ComponentKind::Gaussian { .. } => {
                let mut q = T::zero();
                for j in 0..x.len() {
                    let r = x[j] - self.mode[j];
                    q += r * r * self.inv_var[j];
                }
                self.log_norm - q / T::lit(2.0)
            }
            ComponentKind::HalfDoubleWell { side, n, a } => {
                let v = x[0];
                let inside = match side {
                    Side::Positive => v >= T::zero(),
                    Side::Negative => v < T::zero(),
                };
                if inside {
                    let w = v * v - *a * *a;
                    -(*n / T::lit(2.0)) * w * w
                } else {
                    T::neg_infinity()
                }
            }
            ComponentKind::Custom(t) => t.log_density_unchecked(x),
        }
    }

    fn grad_log_density_into(&self, x: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::zero());
        self.accumulate_grad(x, T::one(), out);
    }
}
