//! Lyapunov certificates and the `Ly(r, q, a)` constants derived from them.

use super::log_scalar::LogScalar;
use super::TheoryError;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// `ln V_d`, the log-volume of the unit ball in `R^d`.
pub fn ln_unit_ball_volume<T: Real>(d: usize) -> T {
    let half_d = T::from_usize_lossy(d) / T::lit(2.0);
    // ln Γ(d/2 + 1) by the half-integer recurrence.
    let ln_gamma = if d.is_multiple_of(2) {
        (1..=d / 2).map(|k| T::from_usize_lossy(k).ln()).sum::<T>()
    } else {
        let half = T::lit(0.5);
        half * T::PI().ln() + (1..=d / 2 + 1).map(|j| (T::from_usize_lossy(j) - half).ln()).sum::<T>()
    };
    half_d * T::PI().ln() - ln_gamma
}

/// `V_d = π^{d/2} / Γ(d/2 + 1)`.
pub fn unit_ball_volume<T: Real>(d: usize) -> Result<T, TheoryError> {
    if d < 1 {
        return Err(TheoryError::InvalidDimension(d));
    }
    Ok(ln_unit_ball_volume::<T>(d).exp())
}

/// A `(λ, h, B(x₀, R), C)`-Lyapunov certificate: `L V ≤ -λV + h·1_B` and the
/// density oscillates by at most a factor `C` on the ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovCert<T> {
    pub lambda: T,
    pub h: T,
    pub center: Vec<T>,
    pub radius: T,
    pub c: LogScalar<T>,
}

impl<T: Real> LyapunovCert<T> {
    pub fn new(lambda: T, h: T, center: Vec<T>, radius: T, c: LogScalar<T>) -> Result<Self, TheoryError> {
        positive("lambda", lambda)?;
        positive("h", h)?;
        positive("R", radius)?;
        if c < LogScalar::one() {
            return Err(TheoryError::InvalidInput { name: "C", value: c.to_real().as_f64(), reason: "must be at least 1" });
        }
        Ok(Self { lambda, h, center, radius, c })
    }

    /// Poincaré constant `(1 + h R² C²) / λ` implied by the certificate.
    pub fn poincare_constant(&self) -> LogScalar<T> {
        let r2 = LogScalar::from_real(self.radius * self.radius);
        (LogScalar::one() + LogScalar::from_real(self.h) * r2 * self.c * self.c) / LogScalar::from_real(self.lambda)
    }
}

/// `Ly(r, q, a)` constants: ball radius, Poincaré bound, and domination
/// constant of the uniform law on the ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyDensityParams<T> {
    pub r: T,
    pub q: LogScalar<T>,
    pub a: LogScalar<T>,
}

pub(crate) fn positive<T: Real>(name: &'static str, v: T) -> Result<(), TheoryError> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(TheoryError::InvalidInput { name, value: v.as_f64(), reason: "must be positive and finite" })
    }
}

/// Certificate for a `(c, L)`-log-concave density from the quadratic
/// Lyapunov function `V(x) = (c/d)‖x - m‖² + 1`.
pub fn lyapunov_cert_log_concave<T: Real>(
    c: T,
    l: T,
    d: usize,
) -> Result<(LyapunovCert<T>, LyDensityParams<T>), TheoryError> {
    positive("c", c)?;
    if l < c {
        return Err(TheoryError::InvalidInput { name: "L", value: l.as_f64(), reason: "must be at least c" });
    }
    if d < 1 {
        return Err(TheoryError::InvalidDimension(d));
    }
    let df = T::from_usize_lossy(d);
    let three = T::lit(3.0);
    let r = (three * df / c).sqrt();
    let ln_c_osc = three * df * l / (T::lit(2.0) * c);
    let cert = LyapunovCert {
        lambda: c,
        h: three * c,
        center: vec![T::zero(); d],
        radius: r,
        c: LogScalar::from_ln(ln_c_osc),
    };
    let q = LogScalar::from_real(c.recip()) + LogScalar::from_real(T::lit(9.0) * df / c) * LogScalar::from_ln(three * df * l / c);
    let ln_a = -ln_unit_ball_volume::<T>(d)
        + ln_c_osc
        + df / T::lit(2.0) * (T::lit(4.0) * T::PI() / (three * df)).ln();
    Ok((cert, LyDensityParams { r, q, a: LogScalar::from_ln(ln_a) }))
}

/// Domination constant for a certificate of quadratic form `γ‖x - x₀‖² + 1`:
/// `a = (C / V_d) exp(λR²/4) (4π / (λR²))^{d/2}`.
pub fn ly_a_from_cert<T: Real>(cert: &LyapunovCert<T>, d: usize) -> Result<LogScalar<T>, TheoryError> {
    positive("lambda", cert.lambda)?;
    positive("R", cert.radius)?;
    if d < 1 {
        return Err(TheoryError::InvalidDimension(d));
    }
    let df = T::from_usize_lossy(d);
    let lr2 = cert.lambda * cert.radius * cert.radius;
    let ln_a = cert.c.ln_abs() - ln_unit_ball_volume::<T>(d)
        + lr2 / T::lit(4.0)
        + df / T::lit(2.0) * (T::lit(4.0) * T::PI() / lr2).ln();
    Ok(LogScalar::from_ln(ln_a))
}

/// Constants of `ν^β` for a `(c, L)`-log-concave `ν`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperedCert<T> {
    pub lambda: T,
    pub r2: T,
    pub q: LogScalar<T>,
    pub a: LogScalar<T>,
    pub cert: LyapunovCert<T>,
}

/// `λ_β = βc`, `R_β² = 4d/λ_β`, `b_β = 2λ_β`, `C_β = exp(2d L/c)`,
/// `q_β = (1 + R_β² C_β² b_β)/λ_β` and `A_β` from [`ly_a_from_cert`].
pub fn tempered_cert<T: Real>(c: T, l: T, d: usize, beta: T) -> Result<TemperedCert<T>, TheoryError> {
    positive("c", c)?;
    if l < c {
        return Err(TheoryError::InvalidInput { name: "L", value: l.as_f64(), reason: "must be at least c" });
    }
    if !(beta > T::zero() && beta <= T::one()) {
        return Err(TheoryError::InvalidInput { name: "beta", value: beta.as_f64(), reason: "must lie in (0, 1]" });
    }
    if d < 1 {
        return Err(TheoryError::InvalidDimension(d));
    }
    let df = T::from_usize_lossy(d);
    let lambda = beta * c;
    let r2 = T::lit(4.0) * df / lambda;
    let b = T::lit(2.0) * lambda;
    let c_osc = LogScalar::from_ln(T::lit(2.0) * df * (l / c));
    let cert = LyapunovCert { lambda, h: b, center: vec![T::zero(); d], radius: r2.sqrt(), c: c_osc };
    let q = cert.poincare_constant();
    let a = ly_a_from_cert(&cert, d)?;
    Ok(TemperedCert { lambda, r2, q, a, cert })
}

/// Holley–Stroock: if `C⁻¹ ≤ π/μ ≤ C`, a Poincaré constant `κ` for `π`
/// transfers to `μ` as `C² κ`.
pub fn holley_stroock<T: Real>(kappa: LogScalar<T>, ratio_bound: LogScalar<T>) -> LogScalar<T> {
    kappa * ratio_bound * ratio_bound
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume::<f64>(1).unwrap() - 2.0).abs() < 1e-14);
        assert!((unit_ball_volume::<f64>(2).unwrap() - std::f64::consts::PI).abs() < 1e-14);
        let v5 = 8.0 * std::f64::consts::PI.powi(2) / 15.0;
        assert!((unit_ball_volume::<f64>(5).unwrap() - v5).abs() < 1e-13);
        assert!((v5 - 5.2638).abs() < 1e-4);
        assert!(unit_ball_volume::<f64>(0).is_err());
        // Recurrence V_d = V_{d-2} 2π/d.
        for d in 3..40 {
            let lhs = ln_unit_ball_volume::<f64>(d);
            let rhs = ln_unit_ball_volume::<f64>(d - 2) + (2.0 * std::f64::consts::PI / d as f64).ln();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn log_concave_unit_case() {
        let (cert, p) = lyapunov_cert_log_concave(1.0f64, 1.0, 1).unwrap();
        assert!((p.r - 3f64.sqrt()).abs() < 1e-15);
        assert!((p.q.to_real() - (1.0 + 9.0 * 3f64.exp())).abs() < 1e-10);
        assert!((p.q.to_real() - 181.77).abs() < 0.01);
        let a = 0.5 * 1.5f64.exp() * (4.0 * std::f64::consts::PI / 3.0).sqrt();
        assert!((p.a.to_real() - a).abs() < 1e-12);
        assert!((p.a.to_real() - 4.586).abs() < 1e-3);
        assert_eq!(cert.lambda, 1.0);
        assert_eq!(cert.h, 3.0);
        assert!((cert.c.ln_abs() - 1.5).abs() < 1e-15);
        // q agrees with the Lyapunov Poincaré constant of its own certificate.
        assert!((cert.poincare_constant().ln_abs() - p.q.ln_abs()).abs() < 1e-12);
    }

    #[test]
    fn log_concave_rejects_bad_input() {
        assert!(lyapunov_cert_log_concave(0.0f64, 1.0, 1).is_err());
        assert!(lyapunov_cert_log_concave(2.0f64, 1.0, 1).is_err());
        assert!(lyapunov_cert_log_concave(1.0f64, 1.0, 0).is_err());
    }

    #[test]
    fn domination_constant() {
        let cert = LyapunovCert::new(4.0f64, 1.0, vec![0.0], 1.0, LogScalar::one()).unwrap();
        let a = ly_a_from_cert(&cert, 1).unwrap().to_real();
        assert!((a - 0.5 * std::f64::consts::E * std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((a - 2.4092).abs() < 5e-4);

        let doubled = LyapunovCert { c: LogScalar::from_real(2.0), ..cert.clone() };
        let a2 = ly_a_from_cert(&doubled, 1).unwrap().to_real();
        assert!((a2 / a - 2.0).abs() < 1e-14);

        let pi = std::f64::consts::PI;
        let cert2 = LyapunovCert::new(4.0 * pi, 1.0, vec![0.0, 0.0], 1.0, LogScalar::one()).unwrap();
        let a3 = ly_a_from_cert(&cert2, 2).unwrap().to_real();
        assert!((a3 - pi.exp() / pi).abs() < 1e-12);
        assert!((a3 - 7.3664).abs() < 1e-3);
    }

    #[test]
    fn tempered_constants() {
        let t = tempered_cert(1.0f64, 1.0, 1, 1.0).unwrap();
        assert_eq!(t.lambda, 1.0);
        assert_eq!(t.r2, 4.0);
        assert!((t.q.to_real() - (1.0 + 8.0 * 4f64.exp())).abs() < 1e-9);
        assert!((t.q.to_real() - 437.79).abs() < 0.01);
        // βc fixed ⇒ identical constants.
        let u = tempered_cert(100.0f64, 100.0, 1, 0.01).unwrap();
        assert!((u.lambda - 1.0).abs() < 1e-15);
        assert!((u.q.ln_abs() - t.q.ln_abs()).abs() < 1e-12);
        assert!((u.a.ln_abs() - t.a.ln_abs()).abs() < 1e-12);
        assert!(tempered_cert(1.0f64, 1.0, 1, 1.5).is_err());
        assert!(tempered_cert(1.0f64, 1.0, 1, 0.0).is_err());
    }

    #[test]
    fn holley_stroock_squares_ratio() {
        let k = holley_stroock(LogScalar::from_real(3.0f64), LogScalar::from_real(2.0));
        assert!((k.to_real() - 12.0).abs() < 1e-13);
    }
}
