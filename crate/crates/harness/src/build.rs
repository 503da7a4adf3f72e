//! From a validated config to densities, levels and a step size.

use crate::config::{ExperimentConfig, InitMode, ProcessConfig, ScenarioName, StepConfig, TargetConfig};
use crate::HarnessError;
use rladder_core::densities::{make_double_well, make_gaussian_mixture, GaussianReference, MixtureDensity, Target};
use rladder_core::diagnostics::PassageProcess;
use rladder_core::dynamics::{default_step, ladder_levels, Level, LevelDensity, Stream, Streams};
use rladder_core::theory::{build_ladder, LadderSpec, Scenario};
use std::sync::Arc;

pub struct Built {
    pub pi: Arc<MixtureDensity<f64>>,
    /// Narrowest component width.
    pub eps: f64,
    pub d: usize,
    pub levels: Vec<Level<f64>>,
    pub rho: f64,
    pub ladder: Option<LadderSpec<f64>>,
    pub step: f64,
    pub process: PassageProcess<f64>,
}

impl Built {
    pub fn k(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn tau_top(&self) -> Option<f64> {
        (self.levels.len() > 1).then(|| self.levels[self.levels.len() - 1].tau)
    }

    /// `(root seed, chain stream)` of chain `c`.
    pub fn chain_seed(cfg: &ExperimentConfig, c: usize) -> (u64, u64) {
        match &cfg.run.seeds {
            Some(seeds) => (seeds[c], 0),
            None => (cfg.run.seed, c as u64),
        }
    }

    /// Initial positions of chain `c`, one per level.
    pub fn initial_state(&self, cfg: &ExperimentConfig, c: usize) -> Result<Vec<Vec<f64>>, HarnessError> {
        let start = self.pi.components()[cfg.run.start_mode].mode().to_vec();
        match cfg.run.init {
            InitMode::Mode => Ok(vec![start; self.levels.len()]),
            InitMode::Stationary => {
                let (root, chain) = Self::chain_seed(cfg, c);
                let mut rng = Streams::new(root, chain).rng(Stream::Init);
                let mut out = Vec::with_capacity(self.levels.len());
                for level in &self.levels {
                    let x = match &level.density {
                        LevelDensity::Gaussian(g) => g.sample(&mut rng, 1).remove(0),
                        _ => self.pi.sample_exact(&mut rng, 1).map_err(|e| HarnessError::Runtime(e.to_string()))?.remove(0),
                    };
                    out.push(x);
                }
                Ok(out)
            }
        }
    }
}

pub fn target(cfg: &ExperimentConfig) -> Result<MixtureDensity<f64>, HarnessError> {
    let r = match &cfg.target {
        TargetConfig::Bimodal { eps, d, mode_offset, weights } => {
            let mut a = vec![0.0; *d];
            let mut b = vec![0.0; *d];
            a[0] = -mode_offset;
            b[0] = *mode_offset;
            make_gaussian_mixture(weights, &[a, b], &[*eps, *eps])
        }
        TargetConfig::GaussianMixture { weights, modes, scales } => make_gaussian_mixture(weights, modes, scales),
        TargetConfig::DoubleWell { n, a } => make_double_well(*n, *a),
    };
    r.map_err(|e| HarnessError::Validation { path: "target".into(), message: e.to_string() })
}

fn ladder(cfg: &ExperimentConfig, eps: f64, d: usize) -> Result<Option<LadderSpec<f64>>, HarnessError> {
    let ProcessConfig::Mreld { ladder: lc, m, .. } = &cfg.process else { return Ok(None) };
    let fail = |e: rladder_core::theory::TheoryError| HarnessError::Validation { path: "process.ladder".into(), message: e.to_string() };
    let mut schedule = if lc.scenario == ScenarioName::Explicit {
        let rho = lc.rho.expect("validated").resolve(eps);
        LadderSpec::explicit(lc.taus.clone().expect("validated"), lc.betas.clone().expect("validated"), rho, *m).map_err(fail)?
    } else {
        let scenario = match lc.scenario {
            ScenarioName::Geometric => Scenario::Geometric,
            ScenarioName::FlatTop => Scenario::FlatTop { alpha: lc.alpha.expect("validated") },
            ScenarioName::Synchronized => Scenario::Synchronized,
            ScenarioName::HighDim => Scenario::HighDim,
            ScenarioName::Explicit => unreachable!(),
        };
        build_ladder(scenario, lc.l_m.unwrap_or(eps), d, lc.k.expect("validated"), *m).map_err(fail)?
    };
    if let Some(rho) = lc.rho {
        schedule.rho = rho.resolve(eps);
        schedule.validate().map_err(fail)?;
    }
    Ok(Some(schedule))
}

pub fn build(cfg: &ExperimentConfig) -> Result<Built, HarnessError> {
    let pi = Arc::new(target(cfg)?);
    let eps = pi.min_width();
    let d = pi.dim();
    let dyn_err = |path: &str| {
        let path = path.to_string();
        move |e: rladder_core::dynamics::DynamicsError| HarnessError::Validation { path: path.clone(), message: e.to_string() }
    };
    let ladder = ladder(cfg, eps, d)?;
    let (levels, rho, process) = match &cfg.process {
        ProcessConfig::Ld => {
            (vec![Level::em(LevelDensity::Mixture(pi.clone()), 1.0).map_err(dyn_err("process"))?], 0.0, PassageProcess::Ld)
        }
        ProcessConfig::Reld { tau, rho, m, kernel } => {
            let (tau, rho) = (tau.resolve(eps), rho.resolve(eps));
            let piy = LevelDensity::Gaussian(GaussianReference::new(d, *m).map_err(|e| HarnessError::Validation {
                path: "process.m".into(),
                message: e.to_string(),
            })?);
            let levels = vec![
                Level::em(LevelDensity::Mixture(pi.clone()), 1.0).map_err(dyn_err("process"))?,
                Level::new(piy.clone(), tau, *kernel).map_err(dyn_err("process.tau"))?,
            ];
            (levels, rho, PassageProcess::Reld { piy, tau, rho, piy_kernel: *kernel })
        }
        ProcessConfig::Mreld { top_kernel, .. } => {
            let schedule = ladder.clone().expect("mreld has a ladder");
            let levels = ladder_levels(pi.clone(), &schedule, *top_kernel).map_err(dyn_err("process.ladder"))?;
            let rho = schedule.rho;
            (levels, rho, PassageProcess::Mreld { ladder: schedule, top_kernel: *top_kernel })
        }
    };
    let step = match cfg.run.step {
        StepConfig::Fixed(h) => h,
        StepConfig::Keyword(_) => default_step(&levels, rho),
    };
    Ok(Built { pi, eps, d, levels, rho, ladder, step, process })
}
