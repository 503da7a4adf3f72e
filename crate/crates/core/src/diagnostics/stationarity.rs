//! Checks that a chain samples the right law: binned χ² against the target,
//! mode occupancy, gradient and normalization checks.

use super::gof::pearson_chisq;
use super::iat::{integrated_autocorr_time, IatMethod, MIN_SERIES};
use super::quadrature::{integrate, QuadratureResult};
use super::DiagnosticsError;
use crate::densities::{ComponentKind, MixtureDensity, Target};
use crate::dynamics::Trajectory;
use crate::scalar::{dist_sq, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareOutcome {
    pub statistic: f64,
    pub p_value: f64,
    /// Cells after pooling.
    pub bins: usize,
    pub n: usize,
}

const MIN_PER_BIN: usize = 50;

/// Pearson χ² of `samples` against equal-mass cells of the normalized
/// target. `d = 1` uses quadrature and works for every component kind;
/// `d = 2` uses a product grid with closed-form Gaussian cell masses.
pub fn stationarity_chisq<T: Real>(
    samples: &[Vec<f64>],
    density: &MixtureDensity<T>,
    bins: usize,
) -> Result<ChiSquareOutcome, DiagnosticsError> {
    let n = samples.len();
    if bins < 2 {
        return Err(DiagnosticsError::InvalidParameter(format!("need at least 2 bins, got {bins}")));
    }
    if n < MIN_PER_BIN * bins {
        return Err(DiagnosticsError::InsufficientData(format!(
            "{n} samples for {bins} bins; need at least {MIN_PER_BIN} per bin"
        )));
    }
    let d = density.dim();
    if let Some(bad) = samples.iter().find(|s| s.len() != d) {
        return Err(DiagnosticsError::InvalidParameter(format!("sample of length {} for a {d}-d density", bad.len())));
    }
    let (observed, expected) = match d {
        1 => cells_1d(samples, density, bins)?,
        2 => cells_2d(samples, density, bins)?,
        _ => return Err(DiagnosticsError::Unsupported(format!("binned test needs d <= 2, got {d}"))),
    };
    let t = pearson_chisq(&observed, &expected, 0)?;
    Ok(ChiSquareOutcome { statistic: t.statistic, p_value: t.p_value, bins: observed.len(), n })
}

fn cells_1d<T: Real>(samples: &[Vec<f64>], density: &MixtureDensity<T>, bins: usize) -> Result<(Vec<f64>, Vec<f64>), DiagnosticsError> {
    const GRID: usize = 8000;
    let (a, b) = density.support_interval();
    let (a, b) = (a.as_f64(), b.as_f64());
    let shift = density
        .modes()
        .iter()
        .map(|m| density.log_density_unchecked(m).as_f64())
        .fold(f64::NEG_INFINITY, f64::max);
    let f = |x: f64| (density.log_density_unchecked(&[T::lit(x)]).as_f64() - shift).exp();
    let nodes: Vec<f64> = (0..=GRID).map(|i| a + (b - a) * i as f64 / GRID as f64).collect();
    let mut cell = Vec::with_capacity(GRID);
    for w in nodes.windows(2) {
        cell.push(integrate(f, w[0], w[1], 1e-300, 1e-12, &[])?.value);
    }
    let total: f64 = cell.iter().sum();
    if !(total > 0.0) {
        return Err(DiagnosticsError::Numerical("density has no mass on its support box".into()));
    }
    // Edges on grid nodes so that bin masses are exact sums of cells.
    let mut edges = vec![f64::NEG_INFINITY];
    let mut masses = Vec::with_capacity(bins);
    let mut acc = 0.0;
    let mut bin_mass = 0.0;
    for (i, m) in cell.iter().enumerate() {
        acc += m / total;
        bin_mass += m / total;
        if edges.len() < bins && acc >= edges.len() as f64 / bins as f64 {
            edges.push(nodes[i + 1]);
            masses.push(bin_mass);
            bin_mass = 0.0;
        }
    }
    masses.push(bin_mass);
    edges.push(f64::INFINITY);
    let mut observed = vec![0.0; masses.len()];
    for s in samples {
        let k = edges.partition_point(|&e| e <= s[0]).clamp(1, masses.len()) - 1;
        observed[k] += 1.0;
    }
    let n = samples.len() as f64;
    Ok((observed, masses.iter().map(|m| m * n).collect()))
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn cells_2d<T: Real>(samples: &[Vec<f64>], density: &MixtureDensity<T>, bins: usize) -> Result<(Vec<f64>, Vec<f64>), DiagnosticsError> {
    let wsum: f64 = density.weights().iter().map(|w| w.as_f64()).sum();
    let mut comps = Vec::new();
    for (w, c) in density.weights().iter().zip(density.components()) {
        let ComponentKind::Gaussian { std_devs } = c.kind() else {
            return Err(DiagnosticsError::Unsupported("2-d binned test needs Gaussian components".into()));
        };
        let mode: Vec<f64> = c.mode().iter().map(|v| v.as_f64()).collect();
        let sd: Vec<f64> = std_devs.iter().map(|v| v.as_f64()).collect();
        comps.push((w.as_f64() / wsum, mode, sd));
    }
    let per_axis = ((bins as f64).sqrt().round() as usize).max(2);
    let (a, b) = density.support_interval();
    let (a, b) = (a.as_f64(), b.as_f64());
    let marginal = |j: usize, t: f64| -> f64 { comps.iter().map(|(w, m, s)| w * std_normal_cdf((t - m[j]) / s[j])).sum() };
    let mut axis_edges = Vec::with_capacity(2);
    for j in 0..2 {
        let mut e = vec![f64::NEG_INFINITY];
        for q in 1..per_axis {
            let target = q as f64 / per_axis as f64;
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if marginal(j, mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            e.push(0.5 * (lo + hi));
        }
        e.push(f64::INFINITY);
        axis_edges.push(e);
    }
    let cdf_diff = |m: f64, s: f64, lo: f64, hi: f64| std_normal_cdf((hi - m) / s) - std_normal_cdf((lo - m) / s);
    let n = samples.len() as f64;
    let mut expected = vec![0.0; per_axis * per_axis];
    for i in 0..per_axis {
        for k in 0..per_axis {
            let (x0, x1) = (axis_edges[0][i], axis_edges[0][i + 1]);
            let (y0, y1) = (axis_edges[1][k], axis_edges[1][k + 1]);
            expected[i * per_axis + k] =
                n * comps.iter().map(|(w, m, s)| w * cdf_diff(m[0], s[0], x0, x1) * cdf_diff(m[1], s[1], y0, y1)).sum::<f64>();
        }
    }
    let mut observed = vec![0.0; per_axis * per_axis];
    for s in samples {
        let i = axis_edges[0].partition_point(|&e| e <= s[0]).clamp(1, per_axis) - 1;
        let k = axis_edges[1].partition_point(|&e| e <= s[1]).clamp(1, per_axis) - 1;
        observed[i * per_axis + k] += 1.0;
    }
    // Product cells off the mixture's support get tiny masses; pool those.
    const POOL_BELOW: f64 = 5.0;
    let (mut obs, mut exp) = (Vec::new(), Vec::new());
    let (mut po, mut pe) = (0.0, 0.0);
    for (o, e) in observed.into_iter().zip(expected) {
        if e < POOL_BELOW {
            po += o;
            pe += e;
        } else {
            obs.push(o);
            exp.push(e);
        }
    }
    if pe > 0.0 {
        obs.push(po);
        exp.push(pe);
    }
    Ok((obs, exp))
}

/// Keeps every `ceil(IAT)`-th point, with the IAT taken from `series`.
pub fn thin_by_iat(points: &[Vec<f64>], series: &[f64], method: IatMethod) -> Result<(Vec<Vec<f64>>, usize), DiagnosticsError> {
    if points.len() != series.len() {
        return Err(DiagnosticsError::InvalidParameter(format!(
            "{} points but a series of length {}",
            points.len(),
            series.len()
        )));
    }
    let stride = integrated_autocorr_time(series, method)?.iat.ceil().max(1.0) as usize;
    Ok((points.iter().step_by(stride).cloned().collect(), stride))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occupancy {
    pub fractions: Vec<f64>,
    pub unassigned: f64,
    /// IAT-corrected standard errors of `fractions`.
    pub se: Vec<f64>,
    pub n: usize,
    pub capture_radius: f64,
}

/// Fraction of recorded replica-0 states in each ball `B(m_i, r)`.
pub fn mode_occupancy<T: Real>(
    traj: &Trajectory<T>,
    density: &MixtureDensity<T>,
    capture_radius: T,
) -> Result<Occupancy, DiagnosticsError> {
    if !(capture_radius > T::zero()) {
        return Err(DiagnosticsError::InvalidParameter(format!("capture radius must be positive, got {capture_radius}")));
    }
    if traj.is_empty() {
        return Err(DiagnosticsError::InsufficientData("empty trajectory".into()));
    }
    let modes = density.modes();
    let r2 = capture_radius * capture_radius;
    let two_r2 = T::lit(4.0) * r2;
    for i in 0..modes.len() {
        for j in i + 1..modes.len() {
            if dist_sq(&modes[i], &modes[j]) <= two_r2 {
                return Err(DiagnosticsError::OverlappingCaptureBalls);
            }
        }
    }
    let n = traj.len();
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let x = traj.sample(i, 0);
        labels.push(modes.iter().position(|m| dist_sq(x, m) <= r2));
    }
    let mut fractions = Vec::with_capacity(modes.len());
    let mut se = Vec::with_capacity(modes.len());
    for k in 0..modes.len() {
        let ind: Vec<f64> = labels.iter().map(|l| if *l == Some(k) { 1.0 } else { 0.0 }).collect();
        let p = ind.iter().sum::<f64>() / n as f64;
        let iat = if n >= MIN_SERIES {
            match integrated_autocorr_time(&ind, IatMethod::GeyerIps) {
                Ok(e) => e.iat.max(1.0),
                Err(DiagnosticsError::ConstantSeries) => 1.0,
                Err(e) => return Err(e),
            }
        } else {
            1.0
        };
        fractions.push(p);
        se.push((p * (1.0 - p) * iat / n as f64).sqrt());
    }
    let unassigned = labels.iter().filter(|l| l.is_none()).count() as f64 / n as f64;
    Ok(Occupancy { fractions, unassigned, se, n, capture_radius: capture_radius.as_f64() })
}

/// Worst relative error `|g_fd - g|_∞ / max(‖g‖, 1)` of the analytic
/// gradient against Richardson-extrapolated central differences, at
/// `n_points` uniform points of the box `[lo, hi]^d`.
pub fn grad_check<T: Real>(
    density: &dyn Target<T>,
    n_points: usize,
    h_fd: f64,
    region: (f64, f64),
    seed: u64,
) -> Result<f64, DiagnosticsError> {
    if !(h_fd > 0.0 && h_fd.is_finite()) {
        return Err(DiagnosticsError::InvalidParameter(format!("finite-difference step must be positive, got {h_fd}")));
    }
    if !(region.0 < region.1) {
        return Err(DiagnosticsError::InvalidParameter(format!("empty region [{}, {}]", region.0, region.1)));
    }
    let d = density.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let logp = |x: &[f64]| -> f64 {
        let xt: Vec<T> = x.iter().map(|&v| T::lit(v)).collect();
        density.log_density_unchecked(&xt).as_f64()
    };
    let mut worst = 0.0f64;
    let mut g = vec![T::zero(); d];
    for _ in 0..n_points {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(region.0..region.1)).collect();
        let xt: Vec<T> = x.iter().map(|&v| T::lit(v)).collect();
        density.grad_log_density_into(&xt, &mut g);
        let norm = g.iter().map(|v| v.as_f64().powi(2)).sum::<f64>().sqrt().max(1.0);
        for j in 0..d {
            let central = |h: f64| {
                let mut p = x.clone();
                let mut m = x.clone();
                p[j] += h;
                m[j] -= h;
                (logp(&p) - logp(&m)) / (2.0 * h)
            };
            let fd = (4.0 * central(0.5 * h_fd) - central(h_fd)) / 3.0;
            worst = worst.max((fd - g[j].as_f64()).abs() / norm);
        }
    }
    Ok(worst)
}

/// `∫ exp(log π)` over an interval of a 1-d density.
pub fn normalization_1d<T: Real>(
    density: &dyn Target<T>,
    range: (f64, f64),
    breakpoints: &[f64],
    tol: f64,
) -> Result<QuadratureResult, DiagnosticsError> {
    if density.dim() != 1 {
        return Err(DiagnosticsError::InvalidParameter(format!("normalization needs d = 1, got {}", density.dim())));
    }
    integrate(
        |x| density.log_density_unchecked(&[T::lit(x)]).as_f64().exp(),
        range.0,
        range.1,
        tol * 1e-2,
        tol,
        breakpoints,
    )
}
