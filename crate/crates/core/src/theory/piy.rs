//! Explicit `(R, Q, A)` constants for the auxiliary density `π^y`.

use super::certs::{ln_unit_ball_volume, positive};
use super::log_scalar::LogScalar;
use super::TheoryError;
use crate::densities::Concavity;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PiYChoice {
    /// `π^y ∝ φ(x/M)`.
    Gaussian,
    /// `π^y ∝ π^β` with the prescribed `β = d / (2M²c + 2M²L²/c)`.
    Tempered,
    /// `π^y ∝ φ(x/M) π^β` with `β ≤ (dM²c + dM²L²/c)⁻¹`.
    GaussianTempered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiYConstants<T> {
    pub r2: T,
    pub q: LogScalar<T>,
    pub a: LogScalar<T>,
    pub lambda: T,
    pub beta: Option<T>,
    pub choice: PiYChoice,
}

impl<T: Real> PiYConstants<T> {
    pub fn radius(&self) -> T {
        self.r2.sqrt()
    }
}

/// Largest admissible `β` for [`PiYChoice::GaussianTempered`].
pub fn gaussian_tempered_beta_threshold<T: Real>(m: T, d: usize, cv: Concavity<T>) -> T {
    let df = T::from_usize_lossy(d);
    (df * m * m * cv.c + df * m * m * cv.l * cv.l / cv.c).recip()
}

/// The `β` that [`PiYChoice::Tempered`] prescribes.
pub fn tempered_beta<T: Real>(m: T, d: usize, cv: Concavity<T>) -> T {
    let df = T::from_usize_lossy(d);
    let two = T::lit(2.0);
    df / (two * m * m * cv.c + two * m * m * cv.l * cv.l / cv.c)
}

pub fn piy_constants<T: Real>(
    choice: PiYChoice,
    m: T,
    d: usize,
    concavity: Option<Concavity<T>>,
    beta: Option<T>,
) -> Result<PiYConstants<T>, TheoryError> {
    positive("M", m)?;
    if d < 1 {
        return Err(TheoryError::InvalidDimension(d));
    }
    let df = T::from_usize_lossy(d);
    let m2 = m * m;
    let two_d1 = T::lit(2.0) * df + T::one();
    let ln_vd = ln_unit_ball_volume::<T>(d);
    let half_d = df / T::lit(2.0);
    let need_cv = || {
        concavity.ok_or(TheoryError::MissingInput("(c, L) log-concavity constants")).and_then(|cv| {
            positive("c", cv.c)?;
            if cv.l < cv.c {
                return Err(TheoryError::InvalidInput { name: "L", value: cv.l.as_f64(), reason: "must be at least c" });
            }
            Ok(cv)
        })
    };
    match choice {
        PiYChoice::Gaussian => {
            let r2 = T::lit(3.0) * m2 * two_d1;
            // Q = 2M²(1 + (9/2)(2d+1) e^{12d+8})
            let q = LogScalar::from_real(T::lit(2.0) * m2)
                * (LogScalar::one()
                    + LogScalar::from_real(T::lit(4.5) * two_d1) * LogScalar::from_ln(T::lit(12.0) * df + T::lit(8.0)));
            let ln_a = -ln_vd
                + half_d * (T::lit(2.0) * T::PI() / (T::lit(3.0) * two_d1)).ln()
                + T::lit(6.0) * df
                + T::lit(4.0);
            Ok(PiYConstants {
                r2,
                q,
                a: LogScalar::from_ln(ln_a),
                lambda: (T::lit(2.0) * m2).recip(),
                beta: None,
                choice,
            })
        }
        PiYChoice::Tempered => {
            let cv = need_cv()?;
            let kappa = cv.l / cv.c;
            let ratio = T::one() + kappa * kappa;
            let b = tempered_beta(m, d, cv);
            if let Some(given) = beta {
                if (given - b).abs() > T::lit(1e-12) * b {
                    return Err(TheoryError::InvalidInput {
                        name: "beta",
                        value: given.as_f64(),
                        reason: "the un-regularized choice prescribes beta = d / (2M²c + 2M²L²/c)",
                    });
                }
            }
            let r2 = T::lit(20.0) * m2 * ratio;
            let q = LogScalar::from_real(m2 * ratio)
                * (LogScalar::from_real(T::lit(4.0) / df)
                    + LogScalar::from_real(T::lit(100.0)) * LogScalar::from_ln(T::lit(44.0) * df * kappa));
            let ln_a = -ln_vd
                + half_d * (T::lit(4.0) * T::PI() / (T::lit(5.0) * df)).ln()
                + T::lit(22.0) * df * kappa
                + T::lit(1.25) * df;
            Ok(PiYConstants {
                r2,
                q,
                a: LogScalar::from_ln(ln_a),
                lambda: b * cv.c / T::lit(4.0),
                beta: Some(b),
                choice,
            })
        }
        PiYChoice::GaussianTempered => {
            let cv = need_cv()?;
            let b = beta.ok_or(TheoryError::MissingInput("beta"))?;
            positive("beta", b)?;
            let threshold = gaussian_tempered_beta_threshold(m, d, cv);
            if b > threshold {
                return Err(TheoryError::BetaAboveThreshold { beta: b.as_f64(), threshold: threshold.as_f64() });
            }
            let r2 = T::lit(5.0) * m2 * two_d1;
            let q = LogScalar::from_real(T::lit(2.0) * m2)
                * (LogScalar::one()
                    + LogScalar::from_real(T::lit(12.5) * two_d1) * LogScalar::from_ln(T::lit(20.0) * df + T::lit(30.0)));
            let ln_a = -ln_vd
                + half_d * (T::lit(8.0) * T::PI() / (T::lit(5.0) * two_d1)).ln()
                + T::lit(12.0) * df
                + T::lit(16.0);
            Ok(PiYConstants {
                r2,
                q,
                a: LogScalar::from_ln(ln_a),
                lambda: (T::lit(2.0) * m2).recip(),
                beta: Some(b),
                choice,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_unit_case() {
        let k = piy_constants(PiYChoice::Gaussian, 1.0f64, 1, None, None).unwrap();
        assert_eq!(k.r2, 9.0);
        let expect = 20.0 + 27f64.ln() + (1.0 + 2.0 * (-20f64).exp() / 27.0).ln();
        assert!((k.q.ln_abs() - expect).abs() < 1e-12);
        assert!((k.q.ln_abs() - 23.296).abs() < 1e-3);
        assert_eq!(k.lambda, 0.5);
    }

    #[test]
    fn threshold_rejection_reports_value() {
        let cv = Concavity { c: 1.0, l: 1.0 };
        match piy_constants(PiYChoice::GaussianTempered, 1.0f64, 1, Some(cv), Some(2.0)) {
            Err(TheoryError::BetaAboveThreshold { threshold, .. }) => assert!((threshold - 0.5).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        assert!(piy_constants(PiYChoice::GaussianTempered, 1.0f64, 1, Some(cv), Some(0.5)).is_ok());
    }

    #[test]
    fn missing_inputs() {
        assert!(matches!(
            piy_constants::<f64>(PiYChoice::Tempered, 1.0, 1, None, None),
            Err(TheoryError::MissingInput(_))
        ));
        let cv = Concavity { c: 1.0, l: 1.0 };
        assert!(matches!(
            piy_constants(PiYChoice::GaussianTempered, 1.0f64, 1, Some(cv), None),
            Err(TheoryError::MissingInput(_))
        ));
    }

    #[test]
    fn tempered_choice_sets_beta() {
        let cv = Concavity { c: 2.0, l: 3.0 };
        let k = piy_constants(PiYChoice::Tempered, 1.5f64, 2, Some(cv), None).unwrap();
        let b = 2.0 / (2.0 * 2.25 * 2.0 + 2.0 * 2.25 * 9.0 / 2.0);
        assert!((k.beta.unwrap() - b).abs() < 1e-15);
        assert!((k.r2 - 20.0 * 2.25 * (1.0 + 2.25)).abs() < 1e-12);
    }
}
