//! `rladder` command line.

use crate::config::{ExperimentConfig, Format, LadderConfig, Param, ProcessConfig, RunConfig, ScenarioName, TargetConfig};
use crate::output::write_atomic;
use crate::report::{now_stamp, report};
use crate::run::{constants, gap_from_series, read_trajectory_csv, run_experiment, run_experiment_with, trajectory_writer, write_bundle};
use crate::sweep::write_csv;
use crate::HarnessError;
use clap::{Parser, Subcommand, ValueEnum};
use rladder_core::diagnostics::SmoothedModeIndicator;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "rladder", version, about = "Replica-exchange Langevin experiments")]
struct Cli {
    /// Replaces `run.seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Replaces `output.dir` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Leave the generated-at stamp out of SVG and markdown output.
    #[arg(long, global = true)]
    no_timestamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the base config (no sweep) and write trajectories and results.json.
    Sample { config: PathBuf },
    /// Run every grid cell and write sweep.csv, results.json and the report.
    Sweep { config: PathBuf },
    /// Print theory bounds as JSON, from a config or from flags.
    Constants {
        config: Option<PathBuf>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 2.0)]
        m: f64,
        #[arg(long, value_enum, default_value_t = ProcessFlag::Reld)]
        process: ProcessFlag,
        /// Defaults to ε^-2.
        #[arg(long)]
        tau: Option<f64>,
        /// Defaults to ε^-d (reld) or the scenario's rate (mreld).
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_enum, default_value_t = ScenarioFlag::Synchronized)]
        scenario: ScenarioFlag,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// IAT-based relaxation estimate from a trajectory CSV.
    Gap {
        trajectory: PathBuf,
        #[arg(long = "f", value_enum)]
        f: FunctionFlag,
        /// Coordinate used by either test function (0-based).
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Indicator threshold along the coordinate.
        #[arg(long, default_value_t = 0.0)]
        center: f64,
        /// Indicator width.
        #[arg(long, default_value_t = 0.1)]
        width: f64,
        #[arg(long, default_value_t = 0)]
        replica: usize,
    },
    /// Plots and summary.md for a directory holding results.json or sweep.csv.
    Report { bundle: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ProcessFlag {
    Reld,
    Mreld,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioFlag {
    Geometric,
    FlatTop,
    Synchronized,
    HighDim,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FunctionFlag {
    Coordinate,
    ModeIndicatorSmoothed,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load(path: &Path, cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Input(format!("{}: {e}", path.display())))?;
    let mut cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| HarnessError::Parse(e.to_string()))?;
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn stamp(cli: &Cli) -> Option<String> {
    (!cli.no_timestamp).then(now_stamp)
}

fn dispatch(cli: &Cli) -> Result<(), HarnessError> {
    match &cli.command {
        Command::Sample { config } => {
            let mut cfg = load(config, cli)?;
            cfg.sweep = None;
            let dir = PathBuf::from(&cfg.output.dir);
            let bundle = run_experiment_with(&cfg, trajectory_writer(&dir))?;
            write_bundle(&bundle, &dir)?;
            println!("{} chains written to {}", cfg.run.chains, dir.display());
            fail_if_failed(&bundle)
        }
        Command::Sweep { config } => {
            let cfg = load(config, cli)?;
            let dir = PathBuf::from(&cfg.output.dir);
            let bundle = if cfg.output.trajectories {
                run_experiment_with(&cfg, trajectory_writer(&dir))?
            } else {
                run_experiment(&cfg)?
            };
            if cfg.output.formats.contains(&Format::Csv) {
                write_csv(&bundle, &dir)?;
            }
            write_bundle(&bundle, &dir)?;
            if cfg.output.formats.contains(&Format::Svg) {
                report(&dir, stamp(cli))?;
            }
            println!("{} cells ({} failed) written to {}", bundle.records.len(), bundle.manifest.failed, dir.display());
            Ok(())
        }
        Command::Constants { config, eps, d, m, process, tau, rho, k, scenario, alpha } => {
            let cfg = match config {
                Some(p) => load(p, cli)?,
                None => {
                    let eps = eps.ok_or_else(|| HarnessError::Input("constants needs a config or --eps".into()))?;
                    flags_config(eps, *d, *m, *process, *tau, *rho, *k, *scenario, *alpha)?
                }
            };
            let out: Vec<serde_json::Value> = constants(&cfg)?
                .into_iter()
                .map(|r| {
                    serde_json::json!({
                        "cell_id": r.cell_id,
                        "params": r.params,
                        "eps": r.eps,
                        "d": r.d,
                        "K": r.k,
                        "tau_top": r.tau_top,
                        "rho": r.rho,
                        "bound": r.bound,
                        "bound_note": r.bound_note,
                        "ld_lower_bound_log": r.ld_lower_bound_log,
                    })
                })
                .collect();
            let text = serde_json::to_string_pretty(&out).expect("json") + "\n";
            emit(cli, "constants.json", &text)
        }
        Command::Gap { trajectory, f, index, center, width, replica } => {
            let text = std::fs::read_to_string(trajectory)
                .map_err(|e| HarnessError::Input(format!("{}: {e}", trajectory.display())))?;
            let (times, points) = read_trajectory_csv(&text, *replica)?;
            if *index >= points[0].len() {
                return Err(HarnessError::Input(format!("--index {index} but the trajectory has {} coordinates", points[0].len())));
            }
            let (series, name): (Vec<f64>, String) = match f {
                FunctionFlag::Coordinate => (points.iter().map(|x| x[*index]).collect(), format!("x_{}", index + 1)),
                FunctionFlag::ModeIndicatorSmoothed => {
                    if !(*width > 0.0) {
                        return Err(HarnessError::Input("--width must be positive".into()));
                    }
                    let mut axis = vec![0.0; points[0].len()];
                    axis[*index] = 1.0;
                    let mut c = vec![0.0; points[0].len()];
                    c[*index] = *center;
                    let ind = SmoothedModeIndicator { axis, center: c, width: *width };
                    (points.iter().map(|x| ind.value(x)).collect(), "mode_indicator_smoothed".into())
                }
            };
            let est = gap_from_series(&times, &series, &name)?;
            let text = serde_json::to_string_pretty(&est).expect("json") + "\n";
            emit(cli, "gap.json", &text)
        }
        Command::Report { bundle } => {
            for p in report(bundle, stamp(cli))? {
                println!("{}", p.display());
            }
            Ok(())
        }
    }
}

fn emit(cli: &Cli, name: &str, text: &str) -> Result<(), HarnessError> {
    print!("{text}");
    if let Some(dir) = &cli.out {
        write_atomic(&dir.join(name), text.as_bytes())?;
    }
    Ok(())
}

fn fail_if_failed(bundle: &crate::ResultsBundle) -> Result<(), HarnessError> {
    match bundle.records.iter().find_map(|r| r.reason.clone()) {
        Some(why) => Err(HarnessError::Runtime(why)),
        None => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
fn flags_config(
    eps: f64,
    d: usize,
    m: f64,
    process: ProcessFlag,
    tau: Option<f64>,
    rho: Option<f64>,
    k: usize,
    scenario: ScenarioFlag,
    alpha: Option<f64>,
) -> Result<ExperimentConfig, HarnessError> {
    let process = match process {
        ProcessFlag::Reld => ProcessConfig::Reld {
            tau: tau.map(Param::Fixed).unwrap_or(Param::EpsPower { eps_pow: -2.0, scale: 1.0 }),
            rho: rho.map(Param::Fixed).unwrap_or(Param::EpsPower { eps_pow: -(d as f64), scale: 1.0 }),
            m,
            kernel: rladder_core::dynamics::Kernel::ExactOu,
        },
        ProcessFlag::Mreld => ProcessConfig::Mreld {
            ladder: LadderConfig {
                scenario: match scenario {
                    ScenarioFlag::Geometric => ScenarioName::Geometric,
                    ScenarioFlag::FlatTop => ScenarioName::FlatTop,
                    ScenarioFlag::Synchronized => ScenarioName::Synchronized,
                    ScenarioFlag::HighDim => ScenarioName::HighDim,
                },
                k: Some(k),
                alpha,
                l_m: None,
                taus: None,
                betas: None,
                rho: rho.map(Param::Fixed),
            },
            m,
            top_kernel: rladder_core::dynamics::Kernel::Em,
        },
    };
    let text = toml::to_string(&ExperimentConfig {
        name: None,
        target: TargetConfig::Bimodal { eps, d, mode_offset: 1.0, weights: [0.5, 0.5] },
        process,
        run: toml::from_str::<RunConfig>("horizon = 1.0").expect("static"),
        diagnostics: Default::default(),
        sweep: None,
        output: Default::default(),
    })
    .expect("serializes");
    ExperimentConfig::from_toml(&text)
}
