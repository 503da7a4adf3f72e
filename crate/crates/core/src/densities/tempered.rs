use super::mixture::MixtureDensity;
use super::{DensityError, Target};
use crate::scalar::{norm_sq, Real};
use rand::Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;

/// `π^β(x) · φ(x/M)`, the regularizer factor being optional.
#[derive(Debug, Clone)]
pub struct TemperedDensity<T: Real> {
    base: Arc<MixtureDensity<T>>,
    beta: T,
    regularizer: Option<T>,
    inv_m2: T,
}

impl<T: Real> TemperedDensity<T> {
    pub fn new(base: Arc<MixtureDensity<T>>, beta: T, regularizer: Option<T>) -> Result<Self, DensityError> {
        if !(beta > T::zero() && beta <= T::one()) {
            return Err(DensityError::InvalidParameter {
                name: "beta",
                value: beta.as_f64(),
                reason: "inverse temperature must lie in (0, 1]",
            });
        }
        let inv_m2 = match regularizer {
            Some(m) if !(m > T::zero()) => {
                return Err(DensityError::InvalidParameter {
                    name: "M",
                    value: m.as_f64(),
                    reason: "regularization scale must be positive",
                })
            }
            Some(m) => (m * m).recip(),
            None => T::zero(),
        };
        Ok(Self { base, beta, regularizer, inv_m2 })
    }

    pub fn base(&self) -> &Arc<MixtureDensity<T>> {
        &self.base
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn regularizer(&self) -> Option<T> {
        self.regularizer
    }
}

impl<T: Real> Target<T> for TemperedDensity<T> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    #[inline]
    fn log_density_unchecked(&self, x: &[T]) -> T {
        let mut v = self.beta * self.base.log_density_unchecked(x);
        if self.regularizer.is_some() {
            v -= norm_sq(x) * self.inv_m2 / T::lit(2.0);
        }
        v
    }

    #[inline]
    fn grad_log_density_into(&self, x: &[T], out: &mut [T]) {
        self.base.grad_log_density_into(x, out);
        for j in 0..x.len() {
            out[j] = self.beta * out[j] - x[j] * self.inv_m2;
        }
    }
}

/// Normalized centered Gaussian `φ(x/M) / M^d`, i.e. `N(0, M² I)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianReference<T> {
    dim: usize,
    scale: T,
}

impl<T: Real> GaussianReference<T> {
    pub fn new(dim: usize, scale: T) -> Result<Self, DensityError> {
        if dim == 0 {
            return Err(DensityError::LengthMismatch("dimension must be at least 1".into()));
        }
        if !(scale > T::zero()) {
            return Err(DensityError::InvalidParameter {
                name: "M",
                value: scale.as_f64(),
                reason: "scale must be positive",
            });
        }
        Ok(Self { dim, scale })
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Vec<T>> {
        (0..n)
            .map(|_| {
                (0..self.dim)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        self.scale * T::lit(z)
                    })
                    .collect()
            })
            .collect()
    }
}

impl<T: Real> Target<T> for GaussianReference<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn log_density_unchecked(&self, x: &[T]) -> T {
        let m2 = self.scale * self.scale;
        let d = T::from_usize_lossy(self.dim);
        -norm_sq(x) / (T::lit(2.0) * m2) - d / T::lit(2.0) * (T::TAU() * m2).ln()
    }

    #[inline]
    fn grad_log_density_into(&self, x: &[T], out: &mut [T]) {
        let inv = (self.scale * self.scale).recip();
        for j in 0..x.len() {
            out[j] = -x[j] * inv;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::make_gaussian_mixture;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_temperature_is_identity() {
        let base = Arc::new(make_gaussian_mixture(&[0.3f64, 0.7], &[vec![-1.0], vec![2.0]], &[0.4, 0.6]).unwrap());
        let t = TemperedDensity::new(base.clone(), 1.0, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = [rng.random_range(-4.0..4.0)];
            assert_eq!(t.log_density(&x).unwrap(), base.log_density(&x).unwrap());
        }
    }

    #[test]
    fn half_temperature_single_gaussian() {
        let base = Arc::new(make_gaussian_mixture(&[1.0f64], &[vec![0.0]], &[1.0]).unwrap());
        let t = TemperedDensity::new(base, 0.5, None).unwrap();
        let c = t.log_density(&[0.0]).unwrap();
        for &x in &[-2.0, -0.5, 1.0, 3.0] {
            let v = t.log_density(&[x]).unwrap() - c;
            assert!((v + x * x / 4.0).abs() < 1e-13);
        }
    }

    #[test]
    fn regularized_gradient() {
        let base = Arc::new(make_gaussian_mixture(&[0.5f64, 0.5], &[vec![-1.0], vec![1.0]], &[0.3, 0.3]).unwrap());
        let t = TemperedDensity::new(base.clone(), 0.2, Some(2.0)).unwrap();
        let x = [0.4];
        let g = t.grad_log_density(&x).unwrap()[0];
        let gb = base.grad_log_density(&x).unwrap()[0];
        assert!((g - (0.2 * gb - 0.4 / 4.0)).abs() < 1e-14);
    }

    #[test]
    fn beta_bounds() {
        let base = Arc::new(make_gaussian_mixture(&[1.0f64], &[vec![0.0]], &[1.0]).unwrap());
        assert!(TemperedDensity::new(base.clone(), 0.0, None).is_err());
        assert!(TemperedDensity::new(base.clone(), 1.5, None).is_err());
        assert!(TemperedDensity::new(base, 0.5, Some(-1.0)).is_err());
    }

    #[test]
    fn reference_is_normalized_gaussian() {
        let g = GaussianReference::new(1, 2.0).unwrap();
        let v = g.log_density(&[0.0]).unwrap();
        assert!((v + 0.5 * (2.0 * std::f64::consts::PI * 4.0).ln()).abs() < 1e-14);
    }
}
