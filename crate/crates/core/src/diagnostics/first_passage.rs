//! First passage of replica 0 from one mode into a ball around another.

use super::DiagnosticsError;
use crate::densities::MixtureDensity;
use crate::dynamics::{default_step, ladder_levels, ClockMode, Kernel, Level, LevelDensity, ReplicaSystem, SystemOptions};
use crate::scalar::{dist_sq, Real};
use crate::theory::LadderSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::ControlFlow;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub enum PassageProcess<T: Real> {
    Ld,
    Reld {
        piy: LevelDensity<T>,
        tau: T,
        rho: T,
        piy_kernel: Kernel,
    },
    Mreld {
        ladder: LadderSpec<T>,
        top_kernel: Kernel,
    },
    /// Replica 0 of `levels` must be the target.
    Custom { levels: Vec<Level<T>>, rho: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassageOptions<T> {
    pub start_mode: usize,
    pub target_mode: usize,
    /// Defaults to twice the width of the target component.
    pub capture_radius: Option<T>,
    pub reps: usize,
    pub t_max: T,
    /// Defaults to the dynamics step policy.
    pub step: Option<T>,
    pub seed: u64,
    pub clock: ClockMode,
}

impl<T: Real> PassageOptions<T> {
    pub fn new(start_mode: usize, target_mode: usize, reps: usize, t_max: T, seed: u64) -> Self {
        Self { start_mode, target_mode, capture_radius: None, reps, t_max, step: None, seed, clock: ClockMode::EventDriven }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageResult {
    /// `None` for censored reps.
    pub times: Vec<Option<f64>>,
    /// Mean of `min(τ, T_max)`: a lower bound on the true mean when any rep
    /// is censored.
    pub restricted_mean: f64,
    /// Mean over uncensored reps only.
    pub uncensored_mean: Option<f64>,
    /// `None` when half or more of the reps are censored.
    pub median: Option<f64>,
    /// 95% normal interval for the restricted mean.
    pub ci: (f64, f64),
    pub censored: usize,
    pub valid: bool,
    pub capture_radius: f64,
    pub t_max: f64,
    pub step: f64,
}

impl PassageResult {
    pub fn reps(&self) -> usize {
        self.times.len()
    }
}

pub fn first_passage_time<T: Real>(
    pi: Arc<MixtureDensity<T>>,
    process: &PassageProcess<T>,
    opts: &PassageOptions<T>,
) -> Result<PassageResult, DiagnosticsError> {
    let comps = pi.components();
    let n_modes = comps.len();
    for (name, idx) in [("start_mode", opts.start_mode), ("target_mode", opts.target_mode)] {
        if idx >= n_modes {
            return Err(DiagnosticsError::InvalidParameter(format!("{name} = {idx} but the mixture has {n_modes} components")));
        }
    }
    if opts.reps == 0 {
        return Err(DiagnosticsError::InvalidParameter("reps must be at least 1".into()));
    }
    if !(opts.t_max > T::zero() && opts.t_max.is_finite()) {
        return Err(DiagnosticsError::InvalidParameter(format!("T_max must be positive, got {}", opts.t_max)));
    }
    let radius = opts.capture_radius.unwrap_or_else(|| T::lit(2.0) * comps[opts.target_mode].width());
    if !(radius > T::zero()) {
        return Err(DiagnosticsError::InvalidParameter(format!("capture radius must be positive, got {radius}")));
    }
    let (levels, rho) = match process {
        PassageProcess::Ld => (vec![Level::em(LevelDensity::Mixture(pi.clone()), T::one())?], T::zero()),
        PassageProcess::Reld { piy, tau, rho, piy_kernel } => (
            vec![Level::em(LevelDensity::Mixture(pi.clone()), T::one())?, Level::new(piy.clone(), *tau, *piy_kernel)?],
            *rho,
        ),
        PassageProcess::Mreld { ladder, top_kernel } => (ladder_levels(pi.clone(), ladder, *top_kernel)?, ladder.rho),
        PassageProcess::Custom { levels, rho } => (levels.clone(), *rho),
    };
    let h = opts.step.unwrap_or_else(|| default_step(&levels, rho));
    let start = comps[opts.start_mode].mode().to_vec();
    let target = comps[opts.target_mode].mode().to_vec();
    let r2 = radius * radius;

    let times: Vec<Result<Option<f64>, DiagnosticsError>> = (0..opts.reps)
        .into_par_iter()
        .map(|rep| {
            if dist_sq(&start, &target) <= r2 {
                return Ok(Some(0.0));
            }
            let sys_opts = SystemOptions::new(h, opts.seed).chain(rep as u64).clock(opts.clock);
            let x0s = vec![start.clone(); levels.len()];
            let mut sys = ReplicaSystem::new(levels.clone(), rho, x0s, sys_opts)?;
            let steps = sys.steps_for(opts.t_max);
            let mut hit = None;
            sys.run_observe(steps, 1, |s| {
                if dist_sq(s.position(0), &target) <= r2 {
                    hit = Some(s.time().as_f64());
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })?;
            Ok(hit)
        })
        .collect();
    let times = times.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(summarize(times, opts.t_max.as_f64(), radius.as_f64(), h.as_f64()))
}

fn summarize(times: Vec<Option<f64>>, t_max: f64, radius: f64, step: f64) -> PassageResult {
    let n = times.len();
    let restricted: Vec<f64> = times.iter().map(|t| t.unwrap_or(t_max)).collect();
    let mean = restricted.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 {
        (restricted.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    let half = 1.96 * sd / (n as f64).sqrt();
    let hits: Vec<f64> = times.iter().filter_map(|t| *t).collect();
    let censored = n - hits.len();
    let uncensored_mean = (!hits.is_empty()).then(|| hits.iter().sum::<f64>() / hits.len() as f64);
    let mut sorted = restricted.clone();
    sorted.sort_by(f64::total_cmp);
    // Censored reps sort last, so the median is known when fewer than half are censored.
    let median = (2 * censored < n).then(|| {
        if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        }
    });
    PassageResult {
        times,
        restricted_mean: mean,
        uncensored_mean,
        median,
        ci: ((mean - half).max(0.0), mean + half),
        censored,
        valid: censored < n,
        capture_radius: radius,
        t_max,
        step,
    }
}
