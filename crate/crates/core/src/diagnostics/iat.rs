//! Integrated autocorrelation time `1 + 2 Σ_{l≥1} ρ_l`.

use super::DiagnosticsError;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
#[derive(Default)]
pub enum IatMethod {
    /// Geyer's initial positive (monotone) sequence.
    #[default]
    GeyerIps,
    /// Sokal's automatic window: smallest `M ≥ c τ(M)`.
    Window { c: f64 },
}


#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IatEstimate {
    /// In units of samples.
    pub iat: f64,
    pub se: f64,
    /// Largest lag entering the sum.
    pub lag: usize,
    pub n: usize,
}

impl IatEstimate {
    pub fn n_effective(&self) -> f64 {
        self.n as f64 / self.iat.max(1.0)
    }
}

pub const MIN_SERIES: usize = 100;
const BATCHES: usize = 10;

/// Normalized autocorrelation `ρ_l`, `l = 0..n-1`, via FFT.
pub fn autocorrelation(series: &[f64]) -> Result<Vec<f64>, DiagnosticsError> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = series.iter().map(|&v| Complex::new(v - mean, 0.0)).collect();
    buf.resize(size, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    let c0 = buf[0].re;
    if !(c0 > 1e-300 * n as f64) {
        return Err(DiagnosticsError::ConstantSeries);
    }
    Ok(buf[..n].iter().map(|c| c.re / c0).collect())
}

fn point_estimate(series: &[f64], method: IatMethod) -> Result<(f64, usize), DiagnosticsError> {
    let rho = autocorrelation(series)?;
    let n = rho.len();
    match method {
        IatMethod::GeyerIps => {
            let mut sum = 0.0;
            let mut prev = f64::INFINITY;
            let mut lag = 0;
            let mut k = 0;
            while 2 * k + 1 < n {
                let g = (rho[2 * k] + rho[2 * k + 1]).min(prev);
                if g <= 0.0 {
                    break;
                }
                sum += g;
                prev = g;
                lag = 2 * k + 1;
                k += 1;
            }
            Ok(((2.0 * sum - 1.0).max(1e-12), lag))
        }
        IatMethod::Window { c } => {
            if !(c > 0.0) {
                return Err(DiagnosticsError::InvalidParameter(format!("window constant must be positive, got {c}")));
            }
            let mut tau = 1.0;
            for m in 1..n {
                tau += 2.0 * rho[m];
                if m as f64 >= c * tau {
                    return Ok((tau.max(1e-12), m));
                }
            }
            Ok((tau.max(1e-12), n - 1))
        }
    }
}

/// IAT with a batch standard error: the same estimator is applied to
/// `10` contiguous batches and the spread of their values gives the SE.
pub fn integrated_autocorr_time(series: &[f64], method: IatMethod) -> Result<IatEstimate, DiagnosticsError> {
    if series.len() < MIN_SERIES {
        return Err(DiagnosticsError::InsufficientData(format!(
            "IAT needs at least {MIN_SERIES} values, got {}",
            series.len()
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(DiagnosticsError::Numerical("series contains non-finite values".into()));
    }
    let (iat, lag) = point_estimate(series, method)?;
    let n = series.len();
    let b = n / BATCHES;
    let se = if b >= MIN_SERIES {
        let mut vals = Vec::with_capacity(BATCHES);
        for chunk in series.chunks_exact(b).take(BATCHES) {
            match point_estimate(chunk, method) {
                Ok((v, _)) => vals.push(v),
                // A frozen batch carries no information about the spread.
                Err(DiagnosticsError::ConstantSeries) => {}
                Err(e) => return Err(e),
            }
        }
        if vals.len() >= 2 {
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
            (var / vals.len() as f64).sqrt()
        } else {
            iat * (2.0 * (2 * lag + 1) as f64 / n as f64).sqrt()
        }
    } else {
        iat * (2.0 * (2 * lag + 1) as f64 / n as f64).sqrt()
    };
    Ok(IatEstimate { iat, se, lag, n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn white_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let e = integrated_autocorr_time(&s, IatMethod::GeyerIps).unwrap();
        assert!(e.iat > 0.9 && e.iat < 1.1, "{e:?}");
        let w = integrated_autocorr_time(&s, IatMethod::Window { c: 5.0 }).unwrap();
        assert!(w.iat > 0.9 && w.iat < 1.1, "{w:?}");
    }

    #[test]
    fn ar1_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let phi: f64 = 0.9;
        let mut x = 0.0;
        let s: Vec<f64> = (0..1_000_000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                x = phi * x + z;
                x
            })
            .collect();
        let want = (1.0 + phi) / (1.0 - phi);
        for m in [IatMethod::GeyerIps, IatMethod::Window { c: 5.0 }] {
            let e = integrated_autocorr_time(&s, m).unwrap();
            assert!((e.iat / want - 1.0).abs() < 0.15, "{m:?}: {e:?}");
            assert!(e.se > 0.0 && e.se < 0.1 * want);
        }
    }

    #[test]
    fn degenerate_input() {
        assert!(matches!(integrated_autocorr_time(&[1.0; 10], IatMethod::GeyerIps), Err(DiagnosticsError::InsufficientData(_))));
        assert!(matches!(integrated_autocorr_time(&[2.0; 500], IatMethod::GeyerIps), Err(DiagnosticsError::ConstantSeries)));
    }
}
