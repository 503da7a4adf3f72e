//! Per-cell execution: chains, diagnostics and theory bounds.

use crate::build::{build, Built};
use crate::config::{CellParams, ExperimentConfig, Format, ProcessConfig, TargetConfig};
use crate::output::{config_hash, write_atomic};
use crate::HarnessError;
use rayon::prelude::*;
use rladder_core::diagnostics::{
    first_passage_time, gap_from_iat, rayleigh_kappa, stationarity_chisq, thin_by_iat,
    ChiSquareOutcome, GapEstimate, Generator, IatMethod, PassageOptions, PassageResult, RayleighEstimator,
    SmoothedModeIndicator,
};
use rladder_core::dynamics::{ReplicaSystem, SwapStats, SystemOptions, Trajectory};
use rladder_core::theory::{ld_lower_bound_bimodal, mreld_bound_for_ladder, reld_bound_for_mixture, HolderSplit, PiYChoice};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRecord {
    /// Natural log of the `κ` upper bound.
    pub kappa_log: f64,
    pub binding_term: String,
    pub detail: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IatRecord {
    pub test_function: String,
    /// Sampling interval of the analysed series.
    pub dt: f64,
    /// Mean over chains, in time units.
    pub mean: f64,
    pub se: f64,
    pub per_chain: Vec<GapEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityRecord {
    pub outcome: ChiSquareOutcome,
    pub thinning_stride: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub cell_id: usize,
    pub params: CellParams,
    pub status: CellStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub process: String,
    pub eps: f64,
    pub d: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub tau_top: Option<f64>,
    pub rho: Option<f64>,
    pub step: Option<f64>,
    /// The resolved config of this cell.
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub bound: Option<BoundRecord>,
    /// Reason the bound is absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_note: Option<String>,
    /// `ln` of the Langevin lower bound for symmetric bimodal targets.
    pub ld_lower_bound_log: Option<f64>,
    pub iat: Option<IatRecord>,
    pub rayleigh: Option<GapEstimate>,
    pub passage: Option<PassageResult>,
    pub stationarity: Option<StationarityRecord>,
    /// Swap statistics pooled over chains.
    pub swaps: Option<SwapStats>,
}

impl CellRecord {
    /// Whether `config_hash` still matches the config echo.
    pub fn hash_matches(&self) -> bool {
        config_hash(&self.config) == self.config_hash
    }

    /// Acceptance rate of each adjacent pair.
    pub fn acceptance(&self) -> Vec<f64> {
        self.swaps.as_ref().map(|s| s.pairs.iter().map(|p| p.acceptance_rate()).collect()).unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub toolkit: String,
    pub version: String,
    pub config_hash: String,
    pub cells: usize,
    pub failed: usize,
    pub units: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsBundle {
    pub manifest: Manifest,
    pub config: ExperimentConfig,
    pub records: Vec<CellRecord>,
}

impl ResultsBundle {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Input(format!("results bundle: {e}")))
    }

    /// Records whose config echo no longer matches their hash.
    pub fn tampered(&self) -> Vec<usize> {
        self.records.iter().filter(|r| !r.hash_matches()).map(|r| r.cell_id).collect()
    }
}

/// Runs every cell in parallel; records come back in cell order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultsBundle, HarnessError> {
    run_experiment_with(cfg, |_, _| Ok(()))
}

/// As [`run_experiment`], handing each cell's trajectories to `sink`.
pub fn run_experiment_with<F>(cfg: &ExperimentConfig, sink: F) -> Result<ResultsBundle, HarnessError>
where
    F: Fn(usize, &[Trajectory<f64>]) -> Result<(), HarnessError> + Sync,
{
    cfg.validate()?;
    let cells = cfg.cells();
    let records = cells
        .par_iter()
        .enumerate()
        .map(|(id, params)| run_cell(cfg, id, *params, &sink))
        .collect::<Result<Vec<_>, _>>()?;
    let failed = records.iter().filter(|r| r.status == CellStatus::Failed).count();
    Ok(ResultsBundle {
        manifest: Manifest {
            toolkit: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config_hash(cfg),
            cells: records.len(),
            failed,
            units: serde_json::json!({
                "iat": "time units",
                "passage": "time units",
                "kappa_bound_log": "natural log",
                "step": "time units",
            }),
        },
        config: cfg.clone(),
        records,
    })
}

fn blank_record(cfg: &ExperimentConfig, id: usize, params: CellParams) -> CellRecord {
    CellRecord {
        cell_id: id,
        params,
        status: CellStatus::Ok,
        reason: None,
        process: cfg.process.name().into(),
        eps: f64::NAN,
        d: 0,
        k: 0,
        tau_top: None,
        rho: None,
        step: None,
        config_hash: config_hash(cfg),
        config: cfg.clone(),
        bound: None,
        bound_note: None,
        ld_lower_bound_log: None,
        iat: None,
        rayleigh: None,
        passage: None,
        stationarity: None,
        swaps: None,
    }
}

fn describe(rec: &mut CellRecord, built: &Built) {
    rec.eps = built.eps;
    rec.d = built.d;
    rec.k = built.k();
    rec.tau_top = built.tau_top();
    rec.rho = (built.k() > 0).then_some(built.rho);
    rec.step = Some(built.step);
}

/// Validation errors abort the sweep; anything that goes wrong while
/// simulating marks the cell failed and keeps going.
fn run_cell<F>(base: &ExperimentConfig, id: usize, params: CellParams, sink: &F) -> Result<CellRecord, HarnessError>
where
    F: Fn(usize, &[Trajectory<f64>]) -> Result<(), HarnessError> + Sync,
{
    let cfg = base.for_cell(&params);
    let mut rec = blank_record(&cfg, id, params);
    let built = build(&cfg)?;
    describe(&mut rec, &built);
    if cfg.diagnostics.bounds {
        bounds(&cfg, &built, &mut rec);
    }

    let mut failures = Vec::new();
    let indicator = indicator(&cfg, &built);
    let chains: Result<Vec<Trajectory<f64>>, String> = (0..cfg.run.chains)
        .into_par_iter()
        .map(|c| run_chain(&cfg, &built, c).map_err(|e| format!("chain {c}: {e}")))
        .collect();
    match chains {
        Ok(trajs) => {
            sink(id, &trajs)?;
            if built.k() > 0 {
                rec.swaps = Some(pool_swaps(&trajs));
            }
            if cfg.diagnostics.iat {
                match iat(&cfg, &built, &trajs, &indicator) {
                    Ok(r) => rec.iat = Some(r),
                    Err(e) => failures.push(format!("iat: {e}")),
                }
            }
            if cfg.diagnostics.stationarity {
                match stationarity(&cfg, &built, &trajs, &indicator) {
                    Ok(r) => rec.stationarity = Some(r),
                    Err(e) => failures.push(format!("stationarity: {e}")),
                }
            }
        }
        Err(e) => failures.push(e),
    }
    if let Some(p) = &cfg.diagnostics.passage {
        let mut opts = PassageOptions::new(cfg.run.start_mode, p.target_mode, p.reps, p.t_max, cfg.run.seed);
        opts.capture_radius = p.capture_radius;
        opts.step = Some(built.step);
        opts.clock = cfg.run.clock;
        match first_passage_time(built.pi.clone(), &built.process, &opts) {
            Ok(r) => {
                if !r.valid {
                    failures.push(format!("passage: all {} reps censored at T_max = {}", r.reps(), r.t_max));
                }
                rec.passage = Some(r);
            }
            Err(e) => failures.push(format!("passage: {e}")),
        }
    }
    if let Some(rc) = &cfg.diagnostics.rayleigh {
        let f = indicator.unwrap_or_else(|| SmoothedModeIndicator::between(&[-1.0], &[1.0], built.eps));
        let estimator = if built.d == 1 {
            RayleighEstimator::Quadrature1d { x_range: None, y_range: None, tol: rc.tol }
        } else {
            RayleighEstimator::MonteCarlo { n: rc.samples, seed: cfg.run.seed }
        };
        let res = match &cfg.process {
            ProcessConfig::Ld => rayleigh_kappa(built.pi.as_ref(), &Generator::Langevin, &f, estimator),
            _ => {
                let top = &built.levels[1];
                let generator =
                    Generator::ReplicaExchange { piy: &top.density, tau: top.tau, rho: built.rho, convention: rc.convention };
                rayleigh_kappa(built.pi.as_ref(), &generator, &f, estimator)
            }
        };
        match res {
            Ok(g) => rec.rayleigh = Some(g),
            Err(e) => failures.push(format!("rayleigh: {e}")),
        }
    }
    if !failures.is_empty() {
        rec.status = CellStatus::Failed;
        rec.reason = Some(failures.join("; "));
    }
    Ok(rec)
}

pub(crate) fn run_chain(cfg: &ExperimentConfig, built: &Built, c: usize) -> Result<Trajectory<f64>, HarnessError> {
    let (root, chain) = Built::chain_seed(cfg, c);
    let opts = SystemOptions::new(built.step, root).chain(chain).clock(cfg.run.clock);
    let x0s = built.initial_state(cfg, c)?;
    let sys = ReplicaSystem::new(built.levels.clone(), built.rho, x0s, opts).map_err(|e| HarnessError::Runtime(e.to_string()))?;
    sys.run(cfg.run.horizon, cfg.run.record_every, cfg.run.record).map_err(|e| HarnessError::Runtime(e.to_string()))
}

fn pool_swaps(trajs: &[Trajectory<f64>]) -> SwapStats {
    let mut pooled = trajs[0].swap_stats.clone();
    for t in &trajs[1..] {
        for (p, q) in pooled.pairs.iter_mut().zip(&t.swap_stats.pairs) {
            p.proposals += q.proposals;
            p.acceptances += q.acceptances;
            p.probability_sum += q.probability_sum;
        }
    }
    pooled
}

/// `tanh` indicator across the first two modes, width `ε` unless configured.
fn indicator(cfg: &ExperimentConfig, built: &Built) -> Option<SmoothedModeIndicator> {
    let comps = built.pi.components();
    if comps.len() < 2 {
        return None;
    }
    let a = comps[cfg.run.start_mode].mode();
    let other = cfg.diagnostics.passage.as_ref().map_or(usize::from(cfg.run.start_mode == 0), |p| p.target_mode);
    let b = comps[other].mode();
    let width = cfg.diagnostics.indicator_width.unwrap_or(built.eps);
    Some(SmoothedModeIndicator::between(a, b, width))
}

fn burn_in_index(cfg: &ExperimentConfig, traj: &Trajectory<f64>) -> usize {
    traj.times.iter().position(|&t| t >= cfg.run.burn_in).unwrap_or(traj.len())
}

fn iat(
    cfg: &ExperimentConfig,
    built: &Built,
    trajs: &[Trajectory<f64>],
    f: &Option<SmoothedModeIndicator>,
) -> Result<IatRecord, String> {
    let f = f.as_ref().ok_or("needs at least two modes")?;
    let dt = built.step * cfg.run.record_every as f64;
    let name = "mode_indicator_smoothed";
    let per_chain = trajs
        .iter()
        .map(|t| {
            let start = burn_in_index(cfg, t);
            let series: Vec<f64> = (start..t.len()).map(|i| f.value(t.sample(i, 0))).collect();
            gap_from_iat(&series, dt, IatMethod::GeyerIps, name).map_err(|e| e.to_string())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = per_chain.len() as f64;
    // IAT = 2κ̂/Δt in samples, so 2κ̂ in time units.
    let mean = per_chain.iter().map(|g| 2.0 * g.kappa_hat).sum::<f64>() / n;
    let se = per_chain.iter().map(|g| (2.0 * g.se.unwrap_or(0.0)).powi(2)).sum::<f64>().sqrt() / n;
    Ok(IatRecord { test_function: name.into(), dt, mean, se, per_chain })
}

fn stationarity(
    cfg: &ExperimentConfig,
    built: &Built,
    trajs: &[Trajectory<f64>],
    f: &Option<SmoothedModeIndicator>,
) -> Result<StationarityRecord, String> {
    let f = f.as_ref().ok_or("needs at least two modes")?;
    let mut pooled = Vec::new();
    let mut strides = Vec::new();
    for t in trajs {
        let start = burn_in_index(cfg, t);
        let points: Vec<Vec<f64>> = (start..t.len()).map(|i| t.sample(i, 0).to_vec()).collect();
        let series: Vec<f64> = points.iter().map(|x| f.value(x)).collect();
        let (kept, stride) = thin_by_iat(&points, &series, IatMethod::GeyerIps).map_err(|e| e.to_string())?;
        pooled.extend(kept);
        strides.push(stride);
    }
    let n = pooled.len();
    let bins = if built.d == 1 { (n / 50).min(20) } else { ((n / 50) as f64).sqrt().floor().min(8.0) as usize };
    let outcome = stationarity_chisq(&pooled, built.pi.as_ref(), bins.max(2)).map_err(|e| e.to_string())?;
    Ok(StationarityRecord { outcome, thinning_stride: strides })
}

fn bounds(cfg: &ExperimentConfig, built: &Built, rec: &mut CellRecord) {
    let Some(cv) = built.pi.common_concavity() else {
        rec.bound_note = Some("components carry no log-concavity certificate".into());
        return;
    };
    let res = match &cfg.process {
        ProcessConfig::Ld => {
            if let TargetConfig::Bimodal { mode_offset, .. } = cfg.target {
                match ld_lower_bound_bimodal(built.eps, mode_offset, built.d) {
                    Ok(b) => rec.ld_lower_bound_log = Some(b.ln_abs()),
                    Err(e) => rec.bound_note = Some(format!("lower bound: {e}")),
                }
            }
            rec.bound_note.get_or_insert_with(|| "no upper bound for ld".into());
            return;
        }
        ProcessConfig::Reld { m, .. } => {
            let top = &built.levels[1];
            reld_bound_for_mixture(cv, built.d, *m, top.tau, built.rho, PiYChoice::Gaussian, None).map(|(b, _)| b)
        }
        ProcessConfig::Mreld { .. } => {
            let ladder = built.ladder.as_ref().expect("mreld has a ladder");
            let two = built.pi.components().len() == 2;
            mreld_bound_for_ladder(cv, built.d, built.pi.min_weight(), ladder, two, HolderSplit::Default)
        }
    };
    match res {
        Ok(b) => {
            rec.bound = Some(BoundRecord {
                kappa_log: b.kappa.ln_abs(),
                binding_term: format!("{:?}", b.argmax_term),
                detail: serde_json::to_value(&b).unwrap_or(serde_json::Value::Null),
            })
        }
        Err(e) => rec.bound_note = Some(e.to_string()),
    }
}

/// Writes `results.json` (and trajectories when configured) under `dir`.
pub fn write_bundle(bundle: &ResultsBundle, dir: &Path) -> Result<(), HarnessError> {
    if bundle.config.output.formats.contains(&Format::Json) {
        write_atomic(&dir.join("results.json"), bundle.to_json().as_bytes())?;
    }
    Ok(())
}

/// A sink writing `traj_cell<id>_chain<c>.csv` files.
pub fn trajectory_writer(dir: &Path) -> impl Fn(usize, &[Trajectory<f64>]) -> Result<(), HarnessError> + Sync + '_ {
    move |id, trajs| {
        for (c, t) in trajs.iter().enumerate() {
            let mut buf = Vec::new();
            t.write_csv(&mut buf).map_err(|e| HarnessError::Runtime(e.to_string()))?;
            write_atomic(&dir.join(format!("traj_cell{id}_chain{c}.csv")), &buf)?;
        }
        Ok(())
    }
}

/// Reads an IAT series from a trajectory CSV (`t,replica,x_1..x_d,swapped_flag`).
pub fn read_trajectory_csv(text: &str, replica: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>), HarnessError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| HarnessError::Input(e.to_string()))?.clone();
    let dim = headers.iter().filter(|h| h.starts_with("x_")).count();
    if headers.get(0) != Some("t") || headers.get(1) != Some("replica") || dim == 0 {
        return Err(HarnessError::Input(format!("unexpected trajectory header {:?}", headers)));
    }
    let mut times = Vec::new();
    let mut points = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| HarnessError::Input(e.to_string()))?;
        let num = |i: usize| -> Result<f64, HarnessError> {
            row.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| HarnessError::Input(format!("row {}: column {i} is not a number", line + 2)))
        };
        if num(1)? as usize != replica {
            continue;
        }
        times.push(num(0)?);
        points.push((0..dim).map(|j| num(2 + j)).collect::<Result<Vec<_>, _>>()?);
    }
    if times.is_empty() {
        return Err(HarnessError::Input(format!("no rows for replica {replica}")));
    }
    Ok((times, points))
}

/// IAT-based estimate from a recorded series with uniform spacing.
pub fn gap_from_series(times: &[f64], series: &[f64], name: &str) -> Result<GapEstimate, HarnessError> {
    if times.len() < 2 {
        return Err(HarnessError::Input("need at least two samples".into()));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    gap_from_iat(series, dt, IatMethod::GeyerIps, name).map_err(|e| HarnessError::Input(e.to_string()))
}

/// Bounds for every cell without running any chains.
pub fn constants(cfg: &ExperimentConfig) -> Result<Vec<CellRecord>, HarnessError> {
    cfg.validate()?;
    cfg.cells()
        .into_iter()
        .enumerate()
        .map(|(id, params)| {
            let cell = cfg.for_cell(&params);
            let built = build(&cell)?;
            let mut rec = blank_record(&cell, id, params);
            describe(&mut rec, &built);
            bounds(&cell, &built, &mut rec);
            Ok(rec)
        })
        .collect()
}
