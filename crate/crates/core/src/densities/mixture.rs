use super::component::{Component, ComponentKind, Side};
use super::{DensityError, Target};
use crate::scalar::{norm_sq, Real};
use rand::Rng;
use rand_distr::StandardNormal;

/// `π(x) = Σ p_i ν_i(x)`.
#[derive(Debug, Clone)]
pub struct MixtureDensity<T: Real> {
    weights: Vec<T>,
    log_weights: Vec<T>,
    components: Vec<Component<T>>,
    dim: usize,
    mode_bound: T,
}

fn weight_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(16.0))
}

impl<T: Real> MixtureDensity<T> {
    pub fn new(weights: Vec<T>, components: Vec<Component<T>>) -> Result<Self, DensityError> {
        if components.is_empty() {
            return Err(DensityError::LengthMismatch("mixture needs at least one component".into()));
        }
        if weights.len() != components.len() {
            return Err(DensityError::LengthMismatch(format!(
                "{} weights for {} components",
                weights.len(),
                components.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= T::zero()) || !w.is_finite()) {
            return Err(DensityError::InvalidWeights(format!("weight {w} is negative or not finite")));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > weight_tolerance::<T>() {
            return Err(DensityError::InvalidWeights(format!("weights sum to {total}, not 1")));
        }
        let dim = components[0].dim();
        if let Some((i, c)) = components.iter().enumerate().find(|(_, c)| c.dim() != dim) {
            return Err(DensityError::LengthMismatch(format!(
                "component {i} has dimension {} but component 0 has {dim}",
                c.dim()
            )));
        }
        let mode_bound = components
            .iter()
            .map(|c| norm_sq(c.mode()).sqrt())
            .fold(T::zero(), T::max);
        let log_weights = weights.iter().map(|w| w.ln()).collect();
        Ok(Self { weights, log_weights, components, dim, mode_bound })
    }

    /// Replaces the default `M = max‖m_i‖` with a user bound, which must
    /// still cover every mode.
    pub fn with_mode_bound(mut self, bound: T) -> Result<Self, DensityError> {
        let required = self
            .components
            .iter()
            .map(|c| norm_sq(c.mode()).sqrt())
            .fold(T::zero(), T::max);
        if bound < required {
            return Err(DensityError::ModeBoundTooSmall { bound: bound.as_f64(), required: required.as_f64() });
        }
        self.mode_bound = bound;
        Ok(self)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn components(&self) -> &[Component<T>] {
        &self.components
    }

    pub fn mode_bound(&self) -> T {
        self.mode_bound
    }

    pub fn modes(&self) -> Vec<Vec<T>> {
        self.components.iter().map(|c| c.mode().to_vec()).collect()
    }

    /// Smallest mixture weight, the `p_0` of the perturbation argument.
    pub fn min_weight(&self) -> T {
        self.weights.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn is_gaussian(&self) -> bool {
        self.components.iter().all(Component::is_gaussian)
    }

    /// Largest component width (`ε_max`).
    pub fn max_width(&self) -> T {
        self.components.iter().map(Component::width).fold(T::zero(), T::max)
    }

    /// Smallest component width (`l_m`).
    pub fn min_width(&self) -> T {
        self.components.iter().map(Component::min_width).fold(T::infinity(), T::min)
    }

    /// Common `(c, L)` over all components, i.e. `(min c_i, max L_i)`, when
    /// every component carries a log-concavity certificate.
    pub fn common_concavity(&self) -> Option<super::Concavity<T>> {
        let mut c = T::infinity();
        let mut l = T::zero();
        for comp in &self.components {
            let cv = comp.concavity()?;
            c = c.min(cv.c);
            l = l.max(cv.l);
        }
        Some(super::Concavity { c, l })
    }

    /// Largest available Hessian bound `L_max`. Double-well halves use the
    /// curvature `4na²` at their mode.
    pub fn hessian_bound(&self) -> T {
        self.components
            .iter()
            .map(|c| match (c.concavity(), c.kind()) {
                (Some(cv), _) => cv.l,
                (None, ComponentKind::HalfDoubleWell { n, a, .. }) => T::lit(4.0) * *n * *a * *a,
                (None, _) => T::one(),
            })
            .fold(T::zero(), T::max)
    }

    /// Integration box per coordinate: `[-M - 10 ε_max, M + 10 ε_max]`.
    pub fn support_interval(&self) -> (T, T) {
        let half = self.mode_bound + T::lit(10.0) * self.max_width();
        (-half, half)
    }

    /// Ancestral sampling: component index from the weights, then a Gaussian
    /// draw. Only available when every component is Gaussian.
    pub fn sample_exact<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Vec<Vec<T>>, DensityError> {
        if let Some(i) = self.components.iter().position(|c| !c.is_gaussian()) {
            return Err(DensityError::NonGaussianComponent { index: i });
        }
        let mut cumulative = Vec::with_capacity(self.weights.len());
        let mut acc = 0.0;
        for w in &self.weights {
            acc += w.as_f64();
            cumulative.push(acc);
        }
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.random::<f64>() * acc;
            let idx = cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1);
            let comp = &self.components[idx];
            let ComponentKind::Gaussian { std_devs } = comp.kind() else { unreachable!() };
            let x = comp
                .mode()
                .iter()
                .zip(std_devs)
                .map(|(&m, &s)| {
                    let z: f64 = rng.sample(StandardNormal);
                    m + s * T::lit(z)
                })
                .collect();
            out.push(x);
        }
        Ok(out)
    }

    /// Posterior responsibilities `w_i(x) = softmax(log p_i + log ν_i(x))`.
    pub fn responsibilities(&self, x: &[T]) -> Vec<T> {
        let logs: Vec<T> = self
            .components
            .iter()
            .zip(&self.log_weights)
            .map(|(c, &lw)| lw + c.log_density_unchecked(x))
            .collect();
        let lse = crate::scalar::log_sum_exp(&logs);
        logs.into_iter().map(|l| (l - lse).exp()).collect()
    }
}

impl<T: Real> Target<T> for MixtureDensity<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    // Streaming log-sum-exp: no allocation in the sampler's inner loop.
    #[inline]
    fn log_density_unchecked(&self, x: &[T]) -> T {
        let mut max = T::neg_infinity();
        let mut sum = T::zero();
        for (c, &lw) in self.components.iter().zip(&self.log_weights) {
            let v = lw + c.log_density_unchecked(x);
            if v == T::neg_infinity() {
                continue;
            }
            if v <= max {
                sum += (v - max).exp();
            } else {
                sum = sum * (max - v).exp() + T::one();
                max = v;
            }
        }
        if max == T::neg_infinity() {
            return max;
        }
        max + sum.ln()
    }

    #[inline]
    fn grad_log_density_into(&self, x: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::zero());
        let mut max = T::neg_infinity();
        let mut sum = T::zero();
        for (c, &lw) in self.components.iter().zip(&self.log_weights) {
            let v = lw + c.log_density_unchecked(x);
            if v == T::neg_infinity() {
                continue;
            }
            let weight = if v <= max {
                (v - max).exp()
            } else {
                let rescale = (max - v).exp();
                sum *= rescale;
                out.iter_mut().for_each(|g| *g *= rescale);
                max = v;
                T::one()
            };
            sum += weight;
            c.accumulate_grad(x, weight, out);
        }
        if sum > T::zero() {
            out.iter_mut().for_each(|g| *g = *g / sum);
        }
    }
}

/// Mixture of isotropic Gaussians `Σ p_i N(m_i, ε_i² I)`.
pub fn make_gaussian_mixture<T: Real>(
    weights: &[T],
    modes: &[Vec<T>],
    scales: &[T],
) -> Result<MixtureDensity<T>, DensityError> {
    if weights.len() != modes.len() || modes.len() != scales.len() {
        return Err(DensityError::LengthMismatch(format!(
            "{} weights, {} modes and {} scales",
            weights.len(),
            modes.len(),
            scales.len()
        )));
    }
    if modes.is_empty() {
        return Err(DensityError::LengthMismatch("mixture needs at least one component".into()));
    }
    let mut components = Vec::with_capacity(modes.len());
    for (i, (m, &s)) in modes.iter().zip(scales).enumerate() {
        if !(s > T::zero()) || !s.is_finite() {
            return Err(DensityError::NonPositiveScale { index: i, value: s.as_f64() });
        }
        components.push(Component::gaussian(m.clone(), s)?);
    }
    MixtureDensity::new(weights.to_vec(), components)
}

/// The double-well density `exp(-(n/2)(x² - a²)²)` written as the equal-weight
/// mixture of its two half-line restrictions.
pub fn make_double_well<T: Real>(n: T, a: T) -> Result<MixtureDensity<T>, DensityError> {
    let half = T::lit(0.5);
    MixtureDensity::new(
        vec![half, half],
        vec![
            Component::half_double_well(Side::Negative, n, a)?,
            Component::half_double_well(Side::Positive, n, a)?,
        ],
    )
}
