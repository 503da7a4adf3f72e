use super::DynamicsError;
use crate::scalar::Real;
use rand::Rng;
use rand_distr::StandardNormal;

#[inline]
pub(crate) fn normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let z: f64 = rng.sample(StandardNormal);
    T::lit(z)
}

/// In-place Euler–Maruyama update `x += τ g h + √(2τh) ξ` for a drift
/// `g` already evaluated at `x`.
#[inline]
pub(crate) fn em_update<T: Real, R: Rng + ?Sized>(x: &mut [T], grad: &[T], tau: T, h: T, rng: &mut R) {
    let scale = (T::lit(2.0) * tau * h).sqrt();
    let th = tau * h;
    for j in 0..x.len() {
        x[j] += th * grad[j] + scale * normal::<T, R>(rng);
    }
}

/// One Euler–Maruyama step of `dX = τ b(X) dt + √(2τ) dW`.
pub fn em_step<T: Real, R: Rng + ?Sized>(
    x: &[T],
    drift: impl Fn(&[T], &mut [T]),
    tau: T,
    h: T,
    rng: &mut R,
) -> Result<Vec<T>, DynamicsError> {
    positive("h", h)?;
    positive("tau", tau)?;
    let mut g = vec![T::zero(); x.len()];
    drift(x, &mut g);
    if g.iter().any(|v| !v.is_finite()) {
        return Err(DynamicsError::NonFiniteDrift { replica: 0, time: f64::NAN, x: x.iter().map(|v| v.as_f64()).collect() });
    }
    let mut out = x.to_vec();
    em_update(&mut out, &g, tau, h, rng);
    Ok(out)
}

/// `(e^{-τ dt/M²}, M²(1 - e^{-2τ dt/M²}))`: mean factor and variance of the
/// exact transition of `dY = -(τ/M²) Y dt + √(2τ) dW`.
#[inline]
pub(crate) fn ou_coefficients<T: Real>(tau: T, m: T, dt: T) -> (T, T) {
    let m2 = m * m;
    let r = tau * dt / m2;
    ((-r).exp(), -m2 * (-T::lit(2.0) * r).exp_m1())
}

#[inline]
pub(crate) fn ou_update<T: Real, R: Rng + ?Sized>(y: &mut [T], tau: T, m: T, dt: T, rng: &mut R) {
    let (decay, var) = ou_coefficients(tau, m, dt);
    let sd = var.sqrt();
    for v in y.iter_mut() {
        *v = decay * *v + sd * normal::<T, R>(rng);
    }
}

/// Exact draw from the Ornstein–Uhlenbeck transition with stationary law
/// `N(0, M² I)` at speed `τ`.
pub fn ou_exact_step<T: Real, R: Rng + ?Sized>(y: &[T], tau: T, m: T, dt: T, rng: &mut R) -> Result<Vec<T>, DynamicsError> {
    positive("dt", dt)?;
    positive("M", m)?;
    positive("tau", tau)?;
    let mut out = y.to_vec();
    ou_update(&mut out, tau, m, dt, rng);
    Ok(out)
}

/// `min(1, π_k(y) π_{k+1}(x) / (π_k(x) π_{k+1}(y)))` from the four
/// log-densities, for exchanging `x` at level `k` with `y` at level `k+1`.
pub fn swap_probability<T: Real>(
    logpi_k_at_x: T,
    logpi_k_at_y: T,
    logpi_k1_at_x: T,
    logpi_k1_at_y: T,
) -> Result<T, DynamicsError> {
    if [logpi_k_at_x, logpi_k_at_y, logpi_k1_at_x, logpi_k1_at_y].iter().any(|v| v.is_nan()) {
        return Err(DynamicsError::NanSwapInput);
    }
    let num = logpi_k_at_y + logpi_k1_at_x;
    let den = logpi_k_at_x + logpi_k1_at_y;
    if num == T::neg_infinity() {
        return Ok(T::zero());
    }
    if den == T::neg_infinity() {
        return Ok(T::one());
    }
    let log_ratio = num - den;
    if log_ratio.is_nan() {
        return Err(DynamicsError::NanSwapInput);
    }
    Ok(if log_ratio >= T::zero() { T::one() } else { log_ratio.exp() })
}

fn positive<T: Real>(name: &'static str, v: T) -> Result<(), DynamicsError> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(DynamicsError::InvalidParameter { name, value: v.as_f64(), reason: "must be positive and finite" })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn var(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
    }

    #[test]
    fn pure_diffusion_increments() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = 0.01;
        let n = 100_000;
        for &tau in &[1.0, 2.0] {
            let inc: Vec<f64> =
                (0..n).map(|_| em_step(&[0.0], |_, g| g[0] = 0.0, tau, h, &mut rng).unwrap()[0]).collect();
            let target = 2.0 * tau * h;
            let se = target * (2.0 / (n as f64 - 1.0)).sqrt();
            assert!((var(&inc) - target).abs() < 3.0 * se, "tau {tau}");
        }
    }

    #[test]
    fn em_rejects_non_finite_drift() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            em_step(&[1.0], |_, g| g[0] = f64::NAN, 1.0, 0.1, &mut rng),
            Err(DynamicsError::NonFiniteDrift { .. })
        ));
        assert!(em_step(&[1.0], |_, g| g[0] = 0.0, 1.0, 0.0, &mut rng).is_err());
    }

    #[test]
    fn ou_mean_halves() {
        let (decay, _) = ou_coefficients(1.0f64, 1.0, 2f64.ln());
        assert!((2.0 * decay - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ou_stationary_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = 1.5;
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| ou_exact_step(&[3.0], 1.0, m, 50.0 * m * m, &mut rng).unwrap()[0]).collect();
        let se = m * m * (2.0 / (n as f64 - 1.0)).sqrt();
        assert!((var(&draws) - m * m).abs() < 3.0 * se);
    }

    #[test]
    fn swap_identity_and_symmetry() {
        assert_eq!(swap_probability(-1.0, -1.0, -2.0, -2.0).unwrap(), 1.0);
        assert_eq!(swap_probability(-3.0f64, -3.0, -0.5, -0.5).unwrap(), 1.0);
        assert!(swap_probability(f64::NAN, 0.0, 0.0, 0.0).is_err());
        assert_eq!(swap_probability(0.0, f64::NEG_INFINITY, 0.0, 0.0).unwrap(), 0.0);
        let s = swap_probability(0.0, -2.0, -1.0, -1.0).unwrap();
        assert!((s - (-2f64).exp()).abs() < 1e-15);
    }
}
