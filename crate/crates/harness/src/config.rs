//! Experiment configuration, parsed from TOML.
//!
//! ```toml
//! [target]
//! kind = "bimodal"
//! eps = 0.2
//!
//! [process]
//! kind = "reld"
//! tau = { eps_pow = -1.0 }
//! rho = { eps_pow = -1.0 }
//!
//! [run]
//! horizon = 200.0
//! chains = 4
//!
//! [sweep]
//! eps = [0.3, 0.25, 0.2]
//! ```

use crate::HarnessError;
use rladder_core::diagnostics::ExchangeConvention;
use rladder_core::dynamics::{ClockMode, Kernel, RecordPolicy};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub target: TargetConfig,
    pub process: ProcessConfig,
    pub run: RunConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetConfig {
    /// Two isotropic Gaussians of width `eps` at `±mode_offset · e_1`.
    Bimodal {
        eps: f64,
        #[serde(default = "one")]
        d: usize,
        #[serde(default = "one_f")]
        mode_offset: f64,
        #[serde(default = "even")]
        weights: [f64; 2],
    },
    GaussianMixture {
        weights: Vec<f64>,
        modes: Vec<Vec<f64>>,
        scales: Vec<f64>,
    },
    /// `exp(-(n/2)(x² - a²)²)`.
    DoubleWell { n: f64, a: f64 },
}

/// A number, or `scale · ε^eps_pow` with `ε` the narrowest component width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Fixed(f64),
    EpsPower {
        eps_pow: f64,
        #[serde(default = "one_f")]
        scale: f64,
    },
}

impl Param {
    pub fn resolve(self, eps: f64) -> f64 {
        match self {
            Param::Fixed(v) => v,
            Param::EpsPower { eps_pow, scale } => scale * eps.powf(eps_pow),
        }
    }

    fn check(self, path: &str) -> Result<(), HarnessError> {
        let ok = match self {
            Param::Fixed(v) => v > 0.0 && v.is_finite(),
            Param::EpsPower { eps_pow, scale } => eps_pow.is_finite() && scale > 0.0 && scale.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            invalid(path, format!("must be positive and finite, got {self:?}"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProcessConfig {
    Ld,
    /// Target plus one auxiliary replica with stationary law `φ(x/M)`.
    Reld {
        tau: Param,
        rho: Param,
        #[serde(default = "two")]
        m: f64,
        #[serde(default = "exact_ou")]
        kernel: Kernel,
    },
    Mreld {
        ladder: LadderConfig,
        #[serde(default = "two")]
        m: f64,
        #[serde(default)]
        top_kernel: Kernel,
    },
}

impl ProcessConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ProcessConfig::Ld => "ld",
            ProcessConfig::Reld { .. } => "reld",
            ProcessConfig::Mreld { .. } => "mreld",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioName {
    Geometric,
    FlatTop,
    Synchronized,
    HighDim,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderConfig {
    pub scenario: ScenarioName,
    #[serde(default, alias = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Width the schedule is built from; defaults to `ε`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taus: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    /// Replaces the scenario's swap rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Param>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepConfig {
    Fixed(f64),
    /// Only `"auto"` is accepted.
    Keyword(String),
}

impl Default for StepConfig {
    fn default() -> Self {
        StepConfig::Keyword("auto".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitMode {
    /// Every replica starts at `start_mode`.
    #[default]
    Mode,
    /// Replica 0 draws from `π`; a Gaussian top level draws from `N(0, M²I)`;
    /// other levels draw from `π`.
    Stationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub horizon: f64,
    #[serde(default)]
    pub step: StepConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub chains: usize,
    /// One root seed per chain. Without it chain `c` uses stream `c` of `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "one")]
    pub record_every: usize,
    /// Time discarded before diagnostics.
    #[serde(default)]
    pub burn_in: f64,
    #[serde(default)]
    pub init: InitMode,
    #[serde(default)]
    pub start_mode: usize,
    #[serde(default)]
    pub clock: ClockMode,
    #[serde(default)]
    pub record: RecordPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// IAT of the smoothed mode indicator along each chain.
    #[serde(default = "yes")]
    pub iat: bool,
    /// Width of the smoothed mode indicator; defaults to `ε`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub indicator_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub passage: Option<PassageConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rayleigh: Option<RayleighConfig>,
    #[serde(default)]
    pub stationarity: bool,
    /// Theory bounds, when the target's components are log-concave.
    #[serde(default = "yes")]
    pub bounds: bool,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self { iat: true, indicator_width: None, passage: None, rayleigh: None, stationarity: false, bounds: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassageConfig {
    pub reps: usize,
    pub t_max: f64,
    #[serde(default = "one")]
    pub target_mode: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capture_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RayleighConfig {
    /// Monte Carlo sample size when `d > 1`; `d = 1` uses quadrature.
    #[serde(default = "mc_samples")]
    pub samples: usize,
    #[serde(default)]
    pub convention: ExchangeConvention,
    /// Relative tolerance of the `d = 1` quadrature.
    #[serde(default = "rayleigh_tol")]
    pub tol: f64,
}

fn rayleigh_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<usize>>,
    #[serde(default, rename = "K", alias = "k", skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<f64>>,
    #[serde(default = "max_cells")]
    pub max_cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "out_dir")]
    pub dir: String,
    #[serde(default = "all_formats")]
    pub formats: Vec<Format>,
    /// Write each chain's trajectory CSV.
    #[serde(default)]
    pub trajectories: bool,
    /// Log-scale the IAT and bound axes of the report.
    #[serde(default = "yes")]
    pub log_axes: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: out_dir(), formats: all_formats(), trajectories: false, log_axes: true }
    }
}

fn one() -> usize {
    1
}
fn one_f() -> f64 {
    1.0
}
fn two() -> f64 {
    2.0
}
fn even() -> [f64; 2] {
    [0.5, 0.5]
}
fn yes() -> bool {
    true
}
fn exact_ou() -> Kernel {
    Kernel::ExactOu
}
fn mc_samples() -> usize {
    100_000
}
fn max_cells() -> usize {
    256
}
fn out_dir() -> String {
    "out".into()
}
fn all_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Svg]
}

fn invalid<T>(path: &str, message: impl Into<String>) -> Result<T, HarnessError> {
    Err(HarnessError::Validation { path: path.to_string(), message: message.into() })
}

fn positive(path: &str, v: f64) -> Result<(), HarnessError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        invalid(path, format!("must be positive and finite, got {v}"))
    }
}

/// One cell of a sweep: the axis values that override the base config.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CellParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
}

impl SweepConfig {
    fn axis_lengths(&self) -> [usize; 5] {
        [
            self.eps.as_ref().map_or(1, Vec::len),
            self.d.as_ref().map_or(1, Vec::len),
            self.k.as_ref().map_or(1, Vec::len),
            self.tau.as_ref().map_or(1, Vec::len),
            self.rho.as_ref().map_or(1, Vec::len),
        ]
    }

    pub fn size(&self) -> usize {
        self.axis_lengths().iter().product()
    }

    /// Cross product in lexicographic order of axis indices, axes ordered
    /// `eps, d, K, tau, rho`.
    pub fn cells(&self) -> Vec<CellParams> {
        let lens = self.axis_lengths();
        let mut out = Vec::with_capacity(self.size());
        let mut idx = [0usize; 5];
        loop {
            out.push(CellParams {
                eps: self.eps.as_ref().map(|v| v[idx[0]]),
                d: self.d.as_ref().map(|v| v[idx[1]]),
                k: self.k.as_ref().map(|v| v[idx[2]]),
                tau: self.tau.as_ref().map(|v| v[idx[3]]),
                rho: self.rho.as_ref().map(|v| v[idx[4]]),
            });
            let mut axis = 5;
            loop {
                if axis == 0 {
                    return out;
                }
                axis -= 1;
                idx[axis] += 1;
                if idx[axis] < lens[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn components(&self) -> usize {
        match &self.target {
            TargetConfig::Bimodal { .. } | TargetConfig::DoubleWell { .. } => 2,
            TargetConfig::GaussianMixture { weights, .. } => weights.len(),
        }
    }

    fn is_gaussian(&self) -> bool {
        !matches!(self.target, TargetConfig::DoubleWell { .. })
    }

    /// Checks everything that can be checked without building densities.
    /// Errors name the offending field.
    pub fn validate(&self) -> Result<(), HarnessError> {
        self.validate_target()?;
        self.validate_process()?;
        self.validate_run()?;
        self.validate_diagnostics()?;
        if let Some(s) = &self.sweep {
            self.validate_sweep(s)?;
        }
        if self.output.dir.is_empty() {
            return invalid("output.dir", "must not be empty");
        }
        Ok(())
    }

    fn validate_target(&self) -> Result<(), HarnessError> {
        match &self.target {
            TargetConfig::Bimodal { eps, d, mode_offset, weights } => {
                positive("target.eps", *eps)?;
                if *d < 1 {
                    return invalid("target.d", "must be at least 1");
                }
                positive("target.mode_offset", *mode_offset)?;
                for (i, &w) in weights.iter().enumerate() {
                    positive(&format!("target.weights[{i}]"), w)?;
                }
            }
            TargetConfig::GaussianMixture { weights, modes, scales } => {
                if weights.is_empty() {
                    return invalid("target.weights", "mixture needs at least one component");
                }
                if modes.len() != weights.len() {
                    return invalid("target.modes", format!("{} modes for {} weights", modes.len(), weights.len()));
                }
                if scales.len() != weights.len() {
                    return invalid("target.scales", format!("{} scales for {} weights", scales.len(), weights.len()));
                }
                let d = modes[0].len();
                for (i, m) in modes.iter().enumerate() {
                    if m.len() != d || d == 0 {
                        return invalid(&format!("target.modes[{i}]"), format!("has dimension {}, expected {d} >= 1", m.len()));
                    }
                    if m.iter().any(|v| !v.is_finite()) {
                        return invalid(&format!("target.modes[{i}]"), "must be finite");
                    }
                }
                for (i, &w) in weights.iter().enumerate() {
                    positive(&format!("target.weights[{i}]"), w)?;
                }
                for (i, &s) in scales.iter().enumerate() {
                    positive(&format!("target.scales[{i}]"), s)?;
                }
            }
            TargetConfig::DoubleWell { n, a } => {
                positive("target.n", *n)?;
                positive("target.a", *a)?;
            }
        }
        Ok(())
    }

    fn validate_process(&self) -> Result<(), HarnessError> {
        match &self.process {
            ProcessConfig::Ld => {}
            ProcessConfig::Reld { tau, rho, m, .. } => {
                tau.check("process.tau")?;
                rho.check("process.rho")?;
                positive("process.m", *m)?;
            }
            ProcessConfig::Mreld { ladder, m, .. } => {
                positive("process.m", *m)?;
                if let Some(rho) = ladder.rho {
                    rho.check("process.ladder.rho")?;
                }
                if let Some(l) = ladder.l_m {
                    if !(l > 0.0 && l < 1.0) {
                        return invalid("process.ladder.l_m", format!("must lie in (0, 1), got {l}"));
                    }
                }
                if ladder.scenario == ScenarioName::Explicit {
                    let (Some(taus), Some(betas)) = (&ladder.taus, &ladder.betas) else {
                        return invalid("process.ladder", "explicit ladders need taus and betas");
                    };
                    if taus.len() < 2 {
                        return invalid("process.ladder.taus", "needs at least two levels (K >= 1)");
                    }
                    if betas.len() != taus.len() {
                        return invalid("process.ladder.betas", format!("{} entries for {} taus", betas.len(), taus.len()));
                    }
                    if ladder.rho.is_none() {
                        return invalid("process.ladder.rho", "explicit ladders need rho");
                    }
                    if ladder.k.is_some_and(|k| k + 1 != taus.len()) {
                        return invalid("process.ladder.k", "disagrees with the number of taus");
                    }
                } else {
                    match ladder.k {
                        None => return invalid("process.ladder.k", "missing"),
                        Some(0) => return invalid("process.ladder.k", "must be at least 1"),
                        Some(_) => {}
                    }
                    if ladder.taus.is_some() || ladder.betas.is_some() {
                        return invalid("process.ladder", "taus and betas are only read for scenario = \"explicit\"");
                    }
                }
                if ladder.scenario == ScenarioName::FlatTop {
                    match ladder.alpha {
                        Some(a) if (0.0..=1.0).contains(&a) => {}
                        Some(a) => return invalid("process.ladder.alpha", format!("must lie in [0, 1], got {a}")),
                        None => return invalid("process.ladder.alpha", "flat_top needs alpha"),
                    }
                }
            }
        }
        Ok(())
    }

    fn validate_run(&self) -> Result<(), HarnessError> {
        let r = &self.run;
        positive("run.horizon", r.horizon)?;
        match &r.step {
            StepConfig::Fixed(h) => positive("run.step", *h)?,
            StepConfig::Keyword(k) if k == "auto" => {}
            StepConfig::Keyword(k) => return invalid("run.step", format!("expected a number or \"auto\", got {k:?}")),
        }
        if r.chains < 1 {
            return invalid("run.chains", "must be at least 1");
        }
        if let Some(seeds) = &r.seeds {
            if seeds.len() != r.chains {
                return invalid("run.seeds", format!("{} seeds for {} chains", seeds.len(), r.chains));
            }
            let distinct: BTreeSet<_> = seeds.iter().collect();
            if distinct.len() != seeds.len() {
                return invalid("run.seeds", "seeds must be distinct across chains");
            }
        }
        if r.record_every < 1 {
            return invalid("run.record_every", "must be at least 1");
        }
        if !(r.burn_in >= 0.0 && r.burn_in < r.horizon) {
            return invalid("run.burn_in", format!("must lie in [0, horizon), got {}", r.burn_in));
        }
        if r.start_mode >= self.components() {
            return invalid("run.start_mode", format!("target has {} components", self.components()));
        }
        if r.init == InitMode::Stationary && !self.is_gaussian() {
            return invalid("run.init", "stationary starts need a Gaussian mixture target");
        }
        Ok(())
    }

    fn validate_diagnostics(&self) -> Result<(), HarnessError> {
        let d = &self.diagnostics;
        if let Some(w) = d.indicator_width {
            positive("diagnostics.indicator_width", w)?;
        }
        if let Some(p) = &d.passage {
            if p.reps < 1 {
                return invalid("diagnostics.passage.reps", "must be at least 1");
            }
            positive("diagnostics.passage.t_max", p.t_max)?;
            if p.target_mode >= self.components() {
                return invalid("diagnostics.passage.target_mode", format!("target has {} components", self.components()));
            }
            if let Some(r) = p.capture_radius {
                positive("diagnostics.passage.capture_radius", r)?;
            }
        }
        if let Some(r) = &d.rayleigh {
            if r.samples < 200 {
                return invalid("diagnostics.rayleigh.samples", "must be at least 200");
            }
            if !(r.tol > 0.0 && r.tol < 1.0) {
                return invalid("diagnostics.rayleigh.tol", "must lie in (0, 1)");
            }
            if matches!(self.process, ProcessConfig::Mreld { .. }) {
                return invalid("diagnostics.rayleigh", "Rayleigh quotients are available for ld and reld only");
            }
            if !self.is_gaussian() && self.dim() > 1 {
                return invalid("diagnostics.rayleigh", "needs d = 1 or a Gaussian target");
            }
        }
        if d.iat && self.components() < 2 {
            return invalid("diagnostics.iat", "the mode indicator needs at least two components");
        }
        Ok(())
    }

    fn dim(&self) -> usize {
        match &self.target {
            TargetConfig::Bimodal { d, .. } => *d,
            TargetConfig::GaussianMixture { modes, .. } => modes.first().map_or(0, Vec::len),
            TargetConfig::DoubleWell { .. } => 1,
        }
    }

    fn validate_sweep(&self, s: &SweepConfig) -> Result<(), HarnessError> {
        let empty = |name: &str, len: Option<usize>| match len {
            Some(0) => invalid(&format!("sweep.{name}"), "axis is empty"),
            _ => Ok(()),
        };
        empty("eps", s.eps.as_ref().map(Vec::len))?;
        empty("d", s.d.as_ref().map(Vec::len))?;
        empty("K", s.k.as_ref().map(Vec::len))?;
        empty("tau", s.tau.as_ref().map(Vec::len))?;
        empty("rho", s.rho.as_ref().map(Vec::len))?;
        if let Some(eps) = &s.eps {
            if matches!(self.target, TargetConfig::DoubleWell { .. }) {
                return invalid("sweep.eps", "double_well targets have no eps");
            }
            for (i, &e) in eps.iter().enumerate() {
                positive(&format!("sweep.eps[{i}]"), e)?;
            }
        }
        if let Some(ds) = &s.d {
            if !matches!(self.target, TargetConfig::Bimodal { .. }) {
                return invalid("sweep.d", "only bimodal targets take a dimension");
            }
            if let Some(i) = ds.iter().position(|&d| d < 1) {
                return invalid(&format!("sweep.d[{i}]"), "must be at least 1");
            }
        }
        if let Some(ks) = &s.k {
            match &self.process {
                ProcessConfig::Mreld { ladder, .. } if ladder.scenario != ScenarioName::Explicit => {}
                _ => return invalid("sweep.K", "K is swept for mreld with a named scenario only"),
            }
            if let Some(i) = ks.iter().position(|&k| k < 1) {
                return invalid(&format!("sweep.K[{i}]"), "must be at least 1");
            }
        }
        if let Some(taus) = &s.tau {
            if !matches!(self.process, ProcessConfig::Reld { .. }) {
                return invalid("sweep.tau", "tau is swept for reld only");
            }
            for (i, &t) in taus.iter().enumerate() {
                positive(&format!("sweep.tau[{i}]"), t)?;
            }
        }
        if let Some(rhos) = &s.rho {
            if matches!(self.process, ProcessConfig::Ld) {
                return invalid("sweep.rho", "ld has no swap rate");
            }
            for (i, &r) in rhos.iter().enumerate() {
                positive(&format!("sweep.rho[{i}]"), r)?;
            }
        }
        let size = s.size();
        if size > s.max_cells {
            return Err(HarnessError::GridTooLarge { cells: size, cap: s.max_cells });
        }
        Ok(())
    }

    /// The base config with one cell's axis values substituted and the sweep
    /// table removed.
    pub fn for_cell(&self, cell: &CellParams) -> Self {
        let mut c = self.clone();
        c.sweep = None;
        if let Some(e) = cell.eps {
            match &mut c.target {
                TargetConfig::Bimodal { eps, .. } => *eps = e,
                TargetConfig::GaussianMixture { scales, .. } => scales.iter_mut().for_each(|s| *s = e),
                TargetConfig::DoubleWell { .. } => {}
            }
        }
        if let (Some(v), TargetConfig::Bimodal { d, .. }) = (cell.d, &mut c.target) {
            *d = v;
        }
        match &mut c.process {
            ProcessConfig::Ld => {}
            ProcessConfig::Reld { tau, rho, .. } => {
                if let Some(v) = cell.tau {
                    *tau = Param::Fixed(v);
                }
                if let Some(v) = cell.rho {
                    *rho = Param::Fixed(v);
                }
            }
            ProcessConfig::Mreld { ladder, .. } => {
                if let Some(v) = cell.k {
                    ladder.k = Some(v);
                }
                if let Some(v) = cell.rho {
                    ladder.rho = Some(Param::Fixed(v));
                }
            }
        }
        c
    }

    /// The cells to run: the sweep grid, or the base config alone.
    pub fn cells(&self) -> Vec<CellParams> {
        match &self.sweep {
            Some(s) => s.cells(),
            None => vec![CellParams::default()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [target]
        kind = "bimodal"
        eps = 0.3

        [process]
        kind = "ld"

        [run]
        horizon = 10.0
    "#;

    fn with(extra: &str) -> String {
        format!("{MINIMAL}\n{extra}")
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.run.chains, 1);
        assert_eq!(c.run.step, StepConfig::Keyword("auto".into()));
        assert!(c.diagnostics.iat);
        assert_eq!(c.cells().len(), 1);
        let back = ExperimentConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn grid_is_lexicographic() {
        let text = r#"
            [target]
            kind = "bimodal"
            eps = 0.3
            [process]
            kind = "mreld"
            ladder = { scenario = "synchronized", k = 1 }
            [run]
            horizon = 1.0
            [sweep]
            eps = [0.3, 0.2, 0.1]
            K = [1, 2]
        "#;
        let c = ExperimentConfig::from_toml(text).unwrap();
        let cells = c.cells();
        assert_eq!(cells.len(), 6);
        let pairs: Vec<_> = cells.iter().map(|p| (p.eps.unwrap(), p.k.unwrap())).collect();
        assert_eq!(pairs, vec![(0.3, 1), (0.3, 2), (0.2, 1), (0.2, 2), (0.1, 1), (0.1, 2)]);
        let cell = c.for_cell(&cells[3]);
        let ProcessConfig::Mreld { ladder, .. } = &cell.process else { panic!() };
        assert_eq!(ladder.k, Some(2));
        assert!(matches!(cell.target, TargetConfig::Bimodal { eps, .. } if eps == 0.2));
    }

    fn path_of(text: &str) -> String {
        match ExperimentConfig::from_toml(text) {
            Err(HarnessError::Validation { path, .. }) => path,
            other => panic!("expected a validation error, got {other:?}"),
        }
    }

    #[test]
    fn zero_levels_names_the_field() {
        let text = MINIMAL.replace("kind = \"ld\"", "kind = \"mreld\"\nladder = { scenario = \"geometric\", k = 0 }");
        assert_eq!(path_of(&text), "process.ladder.k");
    }

    #[test]
    fn validation_paths() {
        assert_eq!(path_of(&with("[sweep]\neps = []")), "sweep.eps");
        assert_eq!(path_of(&with("[sweep]\nK = [1]")), "sweep.K");
        assert_eq!(path_of(&MINIMAL.replace("horizon = 10.0", "horizon = 10.0\nchains = 2\nseeds = [3, 3]")), "run.seeds");
        assert_eq!(path_of(&MINIMAL.replace("horizon = 10.0", "horizon = 10.0\nstep = \"fast\"")), "run.step");
        assert_eq!(path_of(&MINIMAL.replace("eps = 0.3", "eps = -0.3")), "target.eps");
        assert_eq!(path_of(&with("[diagnostics]\npassage = { reps = 0, t_max = 1.0 }")), "diagnostics.passage.reps");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(matches!(ExperimentConfig::from_toml(&with("[output]\ncolour = 1")), Err(HarnessError::Parse(_))));
    }

    #[test]
    fn oversized_grid_is_refused() {
        let text = with("[sweep]\neps = [0.1, 0.2, 0.3]\nmax_cells = 2");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(HarnessError::GridTooLarge { cells: 3, cap: 2 })));
    }

    #[test]
    fn eps_powers_resolve() {
        let p: Param = toml::from_str::<toml::Table>("p = { eps_pow = -2.0, scale = 3.0 }").unwrap()["p"].clone().try_into().unwrap();
        assert!((p.resolve(0.5) - 12.0).abs() < 1e-12);
        assert_eq!(Param::Fixed(4.0).resolve(0.1), 4.0);
    }
}
