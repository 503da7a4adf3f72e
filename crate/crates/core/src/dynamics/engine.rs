//! Event-driven integrator shared by LD, ReLD and mReLD.
//!
//! Diffusions advance on a fixed grid `t_n = n h`. Swap events come from a
//! superposed clock: inter-arrival times are `Exp(Kρ)` and each event picks
//! an adjacent pair uniformly, which is the same law as `K` independent
//! rate-`ρ` clocks. An event falling inside a grid step splits it, so event
//! times are exact. Exact-OU levels are only brought forward when their
//! value is needed: at events and at record points.

use super::kernels::{em_update, ou_update, swap_probability};
use super::level::{Kernel, Level, LevelDensity};
use super::rng::{Stream, Streams};
use super::trajectory::{RecordPolicy, ShadowStats, SwapStats, Trajectory};
use super::DynamicsError;
use crate::densities::{GaussianReference, MixtureDensity, Target, TemperedDensity};
use crate::scalar::{norm_sq, Real};
use crate::theory::LadderSpec;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use std::ops::ControlFlow;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockMode {
    /// Exponential inter-arrival times, events at their exact times.
    #[default]
    EventDriven,
    /// An event at the end of each step with probability `Kρh`.
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemOptions<T> {
    pub step: T,
    pub clock: ClockMode,
    pub seed: u64,
    pub chain: u64,
    pub divergence_radius: T,
    /// Track what a direct `(0, 2)` exchange would have accepted.
    pub shadow: bool,
}

impl<T: Real> SystemOptions<T> {
    pub fn new(step: T, seed: u64) -> Self {
        Self { step, clock: ClockMode::EventDriven, seed, chain: 0, divergence_radius: T::lit(1e8), shadow: true }
    }

    pub fn chain(mut self, chain: u64) -> Self {
        self.chain = chain;
        self
    }

    pub fn clock(mut self, clock: ClockMode) -> Self {
        self.clock = clock;
        self
    }
}

/// `0.1 · min(1/τ_K, 1/ρ, 1/max_k τ_k L_k)` where `L_k` bounds the Hessian
/// of `-log π_k`. Terms that are unavailable (ρ = 0, unknown `L_k`) drop out.
pub fn default_step<T: Real>(levels: &[Level<T>], rho: T) -> T {
    let mut m = T::infinity();
    if let Some(top) = levels.last() {
        if levels.len() > 1 {
            m = m.min(top.tau.recip());
        }
    }
    if rho > T::zero() && levels.len() > 1 {
        m = m.min(rho.recip());
    }
    for l in levels {
        if let Some(s) = l.stiffness() {
            if s > T::zero() {
                m = m.min(s.recip());
            }
        }
    }
    if !m.is_finite() {
        m = T::one();
    }
    T::lit(0.1) * m
}

pub struct ReplicaSystem<T: Real> {
    levels: Vec<Level<T>>,
    rho: T,
    dim: usize,
    opts: SystemOptions<T>,
    x: Vec<T>,
    grad: Vec<T>,
    step_index: u64,
    time: T,
    last_sync: Vec<T>,
    next_event: T,
    replica_rngs: Vec<ChaCha8Rng>,
    clock_rng: ChaCha8Rng,
    pair_rng: ChaCha8Rng,
    accept_rng: ChaCha8Rng,
    inter_arrival: Option<Exp<f64>>,
    stats: SwapStats,
    shadow: Option<ShadowStats>,
    swapped: Vec<bool>,
    event_log: Option<Vec<(f64, usize)>>,
}

impl<T: Real> ReplicaSystem<T> {
    pub fn new(levels: Vec<Level<T>>, rho: T, x0s: Vec<Vec<T>>, opts: SystemOptions<T>) -> Result<Self, DynamicsError> {
        if levels.is_empty() {
            return Err(DynamicsError::LadderMismatch("at least one level is required".into()));
        }
        if x0s.len() != levels.len() {
            return Err(DynamicsError::LadderMismatch(format!(
                "{} levels but {} initial points",
                levels.len(),
                x0s.len()
            )));
        }
        let dim = levels[0].density.dim();
        for (k, l) in levels.iter().enumerate() {
            if l.density.dim() != dim {
                return Err(DynamicsError::DimensionMismatch { expected: dim, got: l.density.dim() });
            }
            if x0s[k].len() != dim {
                return Err(DynamicsError::DimensionMismatch { expected: dim, got: x0s[k].len() });
            }
            if x0s[k].iter().any(|v| !v.is_finite()) {
                return Err(DynamicsError::InvalidParameter {
                    name: "x0",
                    value: f64::NAN,
                    reason: "initial points must be finite",
                });
            }
        }
        if !(opts.step > T::zero() && opts.step.is_finite()) {
            return Err(DynamicsError::InvalidParameter { name: "h", value: opts.step.as_f64(), reason: "must be positive" });
        }
        if !(rho >= T::zero() && rho.is_finite()) {
            return Err(DynamicsError::InvalidParameter { name: "rho", value: rho.as_f64(), reason: "must be nonnegative" });
        }
        let n = levels.len();
        let pairs = n - 1;
        let streams = Streams::new(opts.seed, opts.chain);
        let rate = rho.as_f64() * pairs as f64;
        let inter_arrival = if rate > 0.0 { Some(Exp::new(rate).expect("positive rate")) } else { None };
        let mut clock_rng = streams.rng(Stream::Clock);
        let next_event = match (&inter_arrival, opts.clock) {
            (Some(e), ClockMode::EventDriven) => T::lit(e.sample(&mut clock_rng)),
            _ => T::infinity(),
        };
        let shadow = if opts.shadow && n > 2 { Some(ShadowStats::default()) } else { None };
        Ok(Self {
            rho,
            dim,
            opts,
            x: x0s.into_iter().flatten().collect(),
            grad: vec![T::zero(); dim],
            step_index: 0,
            time: T::zero(),
            last_sync: vec![T::zero(); n],
            next_event,
            replica_rngs: (0..n).map(|k| streams.rng(Stream::Replica(k))).collect(),
            clock_rng,
            pair_rng: streams.rng(Stream::Pair),
            accept_rng: streams.rng(Stream::Accept),
            inter_arrival,
            stats: SwapStats::new(n),
            shadow,
            swapped: vec![false; n],
            event_log: None,
            levels,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Level<T>] {
        &self.levels
    }

    pub fn time(&self) -> T {
        self.time
    }

    pub fn step_size(&self) -> T {
        self.opts.step
    }

    /// Current position of replica `k`. Exact-OU replicas are current only
    /// at record points and inside observers.
    pub fn position(&self, k: usize) -> &[T] {
        &self.x[k * self.dim..(k + 1) * self.dim]
    }

    pub fn swap_stats(&self) -> &SwapStats {
        &self.stats
    }

    pub fn shadow_stats(&self) -> Option<&ShadowStats> {
        self.shadow.as_ref()
    }

    /// Starts keeping `(time, lower pair index)` for every swap event.
    pub fn enable_event_log(&mut self) {
        self.event_log.get_or_insert_with(Vec::new);
    }

    pub fn event_log(&self) -> Option<&[(f64, usize)]> {
        self.event_log.as_deref()
    }

    fn grid_time(&self, n: u64) -> T {
        T::lit(n as f64) * self.opts.step
    }

    fn state_dump(&self) -> Vec<Vec<f64>> {
        self.x.chunks(self.dim).map(|c| c.iter().map(|v| v.as_f64()).collect()).collect()
    }

    fn advance(&mut self, dt: T) -> Result<(), DynamicsError> {
        let d = self.dim;
        let radius2 = self.opts.divergence_radius * self.opts.divergence_radius;
        for k in 0..self.levels.len() {
            let level = &self.levels[k];
            if level.kernel != Kernel::Em {
                continue;
            }
            let xk = &mut self.x[k * d..(k + 1) * d];
            level.density.grad_log_density_into(xk, &mut self.grad);
            if self.grad.iter().any(|g| !g.is_finite()) {
                let x = xk.iter().map(|v| v.as_f64()).collect();
                return Err(DynamicsError::NonFiniteDrift { replica: k, time: self.time.as_f64(), x });
            }
            em_update(xk, &self.grad, level.tau, dt, &mut self.replica_rngs[k]);
            let r2 = norm_sq(xk);
            if !(r2 <= radius2) {
                return Err(DynamicsError::Divergence {
                    replica: k,
                    time: (self.time + dt).as_f64(),
                    norm: r2.sqrt().as_f64(),
                    state: self.state_dump(),
                });
            }
        }
        Ok(())
    }

    fn sync_exact(&mut self) {
        let d = self.dim;
        for k in 0..self.levels.len() {
            if self.levels[k].kernel != Kernel::ExactOu {
                continue;
            }
            let dt = self.time - self.last_sync[k];
            if dt > T::zero() {
                let m = match &self.levels[k].density {
                    LevelDensity::Gaussian(g) => g.scale(),
                    _ => unreachable!("exact kernel is only constructed for Gaussian levels"),
                };
                ou_update(&mut self.x[k * d..(k + 1) * d], self.levels[k].tau, m, dt, &mut self.replica_rngs[k]);
            }
            self.last_sync[k] = self.time;
        }
    }

    fn pair_probability(&self, lo: usize, hi: usize) -> Result<T, DynamicsError> {
        let (a, b) = (self.position(lo), self.position(hi));
        let pk = &self.levels[lo].density;
        let pk1 = &self.levels[hi].density;
        swap_probability(
            pk.log_density_unchecked(a),
            pk.log_density_unchecked(b),
            pk1.log_density_unchecked(a),
            pk1.log_density_unchecked(b),
        )
    }

    fn handle_event(&mut self) -> Result<(), DynamicsError> {
        self.sync_exact();
        let pairs = self.levels.len() - 1;
        let k = self.pair_rng.random_range(0..pairs);
        if let Some(log) = self.event_log.as_mut() {
            log.push((self.time.as_f64(), k));
        }
        let s = self.pair_probability(k, k + 1)?;
        if k == 0 && self.shadow.is_some() {
            let direct = self.pair_probability(0, 2)?;
            let sh = self.shadow.as_mut().expect("checked");
            sh.events += 1;
            sh.adjacent_probability_sum += s.as_f64();
            sh.direct_probability_sum += direct.as_f64();
        }
        let u: f64 = self.accept_rng.random();
        let st = &mut self.stats.pairs[k];
        st.proposals += 1;
        st.probability_sum += s.as_f64();
        if u < s.as_f64() {
            st.acceptances += 1;
            let d = self.dim;
            let (head, tail) = self.x.split_at_mut((k + 1) * d);
            head[k * d..].swap_with_slice(&mut tail[..d]);
            self.swapped[k] = true;
            self.swapped[k + 1] = true;
        }
        Ok(())
    }

    /// Advances to the next grid point, processing the events in between.
    pub fn step(&mut self) -> Result<(), DynamicsError> {
        let target = self.grid_time(self.step_index + 1);
        if self.opts.clock == ClockMode::EventDriven {
            while self.next_event < target {
                let dt = self.next_event - self.time;
                if dt > T::zero() {
                    self.advance(dt)?;
                }
                self.time = self.next_event;
                self.handle_event()?;
                let e = self.inter_arrival.as_ref().expect("finite event implies a clock");
                self.next_event += T::lit(e.sample(&mut self.clock_rng));
            }
        }
        let dt = target - self.time;
        if dt > T::zero() {
            self.advance(dt)?;
        }
        self.time = target;
        self.step_index += 1;
        if self.opts.clock == ClockMode::Bernoulli && self.levels.len() > 1 {
            let p = self.rho.as_f64() * (self.levels.len() - 1) as f64 * self.opts.step.as_f64();
            let u: f64 = self.clock_rng.random();
            if u < p.min(1.0) {
                self.handle_event()?;
            }
        }
        Ok(())
    }

    /// Number of grid steps covering `[0, horizon]`.
    pub fn steps_for(&self, horizon: T) -> u64 {
        let n = (horizon / self.opts.step).as_f64();
        let r = n.round();
        if (n - r).abs() < 1e-9 * r.max(1.0) {
            r as u64
        } else {
            n.ceil() as u64
        }
    }

    /// Runs for `steps` grid steps, calling `observe` at every
    /// `every`-th step with exact-OU levels brought up to date.
    pub fn run_observe(
        &mut self,
        steps: u64,
        every: u64,
        mut observe: impl FnMut(&Self) -> ControlFlow<()>,
    ) -> Result<u64, DynamicsError> {
        let every = every.max(1);
        for i in 1..=steps {
            self.step()?;
            if i % every == 0 {
                self.sync_exact();
                if observe(self).is_break() {
                    return Ok(i);
                }
            }
        }
        Ok(steps)
    }

    /// Runs to `horizon`, recording every `record_every` steps.
    pub fn run(mut self, horizon: T, record_every: usize, policy: RecordPolicy) -> Result<Trajectory<T>, DynamicsError> {
        if !(horizon >= T::zero()) {
            return Err(DynamicsError::InvalidParameter {
                name: "T",
                value: horizon.as_f64(),
                reason: "horizon must be nonnegative",
            });
        }
        if record_every == 0 {
            return Err(DynamicsError::InvalidParameter { name: "record_every", value: 0.0, reason: "must be at least 1" });
        }
        let steps = self.steps_for(horizon);
        let replicas = match policy {
            RecordPolicy::BaseOnly => 1,
            RecordPolicy::All => self.levels.len(),
        };
        let cap = (steps / record_every as u64 + 1) as usize;
        let mut times = Vec::with_capacity(cap);
        let mut samples = Vec::with_capacity(cap * replicas * self.dim);
        let mut swapped = Vec::with_capacity(cap * replicas);
        let echo = self.config_echo(horizon, record_every, policy);
        let mut record = |s: &mut Self| {
            times.push(s.time);
            samples.extend_from_slice(&s.x[..replicas * s.dim]);
            swapped.extend_from_slice(&s.swapped[..replicas]);
            s.swapped.iter_mut().for_each(|f| *f = false);
        };
        record(&mut self);
        let every = record_every as u64;
        for i in 1..=steps {
            self.step()?;
            if i % every == 0 {
                self.sync_exact();
                record(&mut self);
            }
        }
        Ok(Trajectory {
            dim: self.dim,
            replicas,
            times,
            samples,
            swapped,
            swap_stats: self.stats,
            shadow: self.shadow,
            config_echo: echo,
        })
    }

    fn config_echo(&self, horizon: T, record_every: usize, policy: RecordPolicy) -> serde_json::Value {
        let levels: Vec<_> = self
            .levels
            .iter()
            .map(|l| {
                serde_json::json!({
                    "density": l.density.describe(),
                    "tau": l.tau.as_f64(),
                    "kernel": l.kernel,
                })
            })
            .collect();
        serde_json::json!({
            "levels": levels,
            "rho": self.rho.as_f64(),
            "horizon": horizon.as_f64(),
            "step": self.opts.step.as_f64(),
            "record_every": record_every,
            "record": policy,
            "clock": self.opts.clock,
            "seed": self.opts.seed,
            "chain": self.opts.chain,
            "divergence_radius": self.opts.divergence_radius.as_f64(),
        })
    }
}

/// Overdamped Langevin dynamics `dX = ∇log π dt + √2 dB`.
pub fn run_ld<T: Real>(
    density: LevelDensity<T>,
    x0: Vec<T>,
    horizon: T,
    opts: SystemOptions<T>,
    record_every: usize,
) -> Result<Trajectory<T>, DynamicsError> {
    let level = Level::em(density, T::one())?;
    ReplicaSystem::new(vec![level], T::zero(), vec![x0], opts)?.run(horizon, record_every, RecordPolicy::BaseOnly)
}

/// Target and auxiliary replica with exchanges at rate `ρ`.
#[allow(clippy::too_many_arguments)]
pub fn run_reld<T: Real>(
    pi: Arc<MixtureDensity<T>>,
    piy: LevelDensity<T>,
    tau: T,
    rho: T,
    x0: Vec<T>,
    y0: Vec<T>,
    horizon: T,
    opts: SystemOptions<T>,
    record_every: usize,
    policy: RecordPolicy,
    piy_kernel: Kernel,
) -> Result<Trajectory<T>, DynamicsError> {
    let levels = vec![Level::em(LevelDensity::Mixture(pi), T::one())?, Level::new(piy, tau, piy_kernel)?];
    ReplicaSystem::new(levels, rho, vec![x0, y0], opts)?.run(horizon, record_every, policy)
}

/// Levels of a ladder: `π`, then `π^{β_k}`, then `φ(x/M) π^{β_K}` on top
/// (or `φ(x/M)` alone with the exact kernel).
pub fn ladder_levels<T: Real>(
    pi: Arc<MixtureDensity<T>>,
    ladder: &LadderSpec<T>,
    top_kernel: Kernel,
) -> Result<Vec<Level<T>>, DynamicsError> {
    ladder.validate().map_err(|e| DynamicsError::LadderMismatch(e.to_string()))?;
    let k = ladder.k;
    let mut levels = vec![Level::em(LevelDensity::Mixture(pi.clone()), ladder.taus[0])?];
    for i in 1..k {
        let t = TemperedDensity::new(pi.clone(), ladder.betas[i], None)?;
        levels.push(Level::em(LevelDensity::Tempered(t), ladder.taus[i])?);
    }
    let top = match top_kernel {
        Kernel::ExactOu => LevelDensity::Gaussian(GaussianReference::new(pi.dim(), ladder.m)?),
        Kernel::Em => LevelDensity::Tempered(TemperedDensity::new(pi.clone(), ladder.betas[k], Some(ladder.m))?),
    };
    levels.push(Level::new(top, ladder.taus[k], top_kernel)?);
    Ok(levels)
}

/// `K+1` replicas on a ladder with adjacent exchanges.
#[allow(clippy::too_many_arguments)]
pub fn run_mreld<T: Real>(
    pi: Arc<MixtureDensity<T>>,
    ladder: &LadderSpec<T>,
    x0s: Vec<Vec<T>>,
    horizon: T,
    opts: SystemOptions<T>,
    record_every: usize,
    policy: RecordPolicy,
    top_kernel: Kernel,
) -> Result<Trajectory<T>, DynamicsError> {
    if x0s.len() != ladder.k + 1 {
        return Err(DynamicsError::LadderMismatch(format!(
            "ladder has {} levels but {} initial points were given",
            ladder.k + 1,
            x0s.len()
        )));
    }
    let levels = ladder_levels(pi, ladder, top_kernel)?;
    ReplicaSystem::new(levels, ladder.rho, x0s, opts)?.run(horizon, record_every, policy)
}
