//! Goodness-of-fit statistics: Kolmogorov–Smirnov and Pearson χ².

use super::DiagnosticsError;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

/// `Q_KS(λ) = 2 Σ_{k≥1} (-1)^{k-1} e^{-2k²λ²}`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p(d: f64, n_eff: f64) -> f64 {
    let s = n_eff.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

/// One-sample KS test of `data` against a continuous CDF.
pub fn ks_one_sample(data: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestOutcome, DiagnosticsError> {
    if data.is_empty() {
        return Err(DiagnosticsError::InsufficientData("KS test needs at least one observation".into()));
    }
    let mut v = data.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    Ok(TestOutcome { statistic: d, p_value: ks_p(d, n) })
}

/// Two-sample KS test.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<TestOutcome, DiagnosticsError> {
    if a.is_empty() || b.is_empty() {
        return Err(DiagnosticsError::InsufficientData("KS test needs two nonempty samples".into()));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n && j < m {
        let t = x[i].min(y[j]);
        while i < n && x[i] <= t {
            i += 1;
        }
        while j < m && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    Ok(TestOutcome { statistic: d, p_value: ks_p(d, ne) })
}

/// Pearson χ² of observed counts against expected counts, with
/// `bins - 1 - fitted` degrees of freedom.
pub fn pearson_chisq(observed: &[f64], expected: &[f64], fitted: usize) -> Result<TestOutcome, DiagnosticsError> {
    if observed.len() != expected.len() || observed.len() < 2 + fitted {
        return Err(DiagnosticsError::InvalidParameter("chi-square needs matching bins and positive degrees of freedom".into()));
    }
    if expected.iter().any(|&e| !(e > 0.0)) {
        return Err(DiagnosticsError::InvalidParameter("expected counts must be positive".into()));
    }
    let stat: f64 = observed.iter().zip(expected).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = (observed.len() - 1 - fitted) as f64;
    let dist = ChiSquared::new(dof).map_err(|e| DiagnosticsError::Numerical(e.to_string()))?;
    Ok(TestOutcome { statistic: stat, p_value: dist.sf(stat) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn kolmogorov_tail_values() {
        // Q_KS(1.36) ≈ 0.049 and Q_KS(1.63) ≈ 0.0098.
        assert!((kolmogorov_sf(1.36) - 0.0494).abs() < 1e-3);
        assert!((kolmogorov_sf(1.63) - 0.0098).abs() < 5e-4);
    }

    #[test]
    fn ks_accepts_uniform_and_rejects_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u: Vec<f64> = (0..5000).map(|_| rng.random()).collect();
        assert!(ks_one_sample(&u, |x| x.clamp(0.0, 1.0)).unwrap().p_value > 0.01);
        let shifted: Vec<f64> = u.iter().map(|x| x * 0.9).collect();
        assert!(ks_one_sample(&shifted, |x| x.clamp(0.0, 1.0)).unwrap().p_value < 1e-6);
        let v: Vec<f64> = (0..5000).map(|_| rng.random()).collect();
        assert!(ks_two_sample(&u, &v).unwrap().p_value > 0.01);
        assert!(ks_two_sample(&u, &shifted).unwrap().p_value < 1e-6);
    }

    #[test]
    fn chisq_basic() {
        let t = pearson_chisq(&[10.0, 10.0], &[10.0, 10.0], 0).unwrap();
        assert_eq!(t.statistic, 0.0);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        assert!(pearson_chisq(&[1.0], &[1.0], 0).is_err());
    }
}
