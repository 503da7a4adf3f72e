use rladder_harness::{ExperimentConfig, ResultsBundle};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn rladder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rladder")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn repo_configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const SMALL_SWEEP: &str = r#"
[target]
kind = "bimodal"
eps = 0.3

[process]
kind = "reld"
tau = { eps_pow = -1.0 }
rho = { eps_pow = -1.0 }

[run]
horizon = 60.0
chains = 2
seed = 5
record_every = 10

[diagnostics]
rayleigh = {}
passage = { reps = 4, t_max = 100.0 }

[sweep]
eps = [0.3, 0.25, 0.2]
"#;

#[test]
fn sweep_writes_tables_plots_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", SMALL_SWEEP);
    let out = tmp.path().join("out");
    let o = rladder(&["--out", out.to_str().unwrap(), "sweep", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["sweep.csv", "results.json", "passage.svg", "iat.svg", "acceptance.svg", "bounds.svg", "summary.md"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("cell_id,eps,d,K,tau_top,rho,kappa_bound_log,iat_mode_indicator"));
    let summary = std::fs::read_to_string(out.join("summary.md")).unwrap();
    assert!(summary.contains("3 cells, 0 failed"));
    assert!(std::fs::read_to_string(out.join("passage.svg")).unwrap().contains("<!-- generated"));
}

#[test]
fn report_rebuilds_from_csv_alone() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", &SMALL_SWEEP.replace("eps = [0.3, 0.25, 0.2]", "eps = [0.3]"));
    let out = tmp.path().join("out");
    assert!(rladder(&["--out", out.to_str().unwrap(), "sweep", cfg.to_str().unwrap()]).status.success());
    std::fs::remove_file(out.join("results.json")).unwrap();
    std::fs::remove_file(out.join("summary.md")).unwrap();
    let o = rladder(&["--no-timestamp", "report", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("summary.md").is_file());
    assert!(!std::fs::read_to_string(out.join("iat.svg")).unwrap().contains("generated"));
}

#[test]
fn minimal_langevin_sample() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = repo_configs().join("ld_minimal.toml");
    let o = rladder(&["--out", tmp.path().to_str().unwrap(), "sample", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let traj = tmp.path().join("traj_cell0_chain0.csv");
    assert!(traj.is_file());
    let bundle = ResultsBundle::from_json(&std::fs::read_to_string(tmp.path().join("results.json")).unwrap()).unwrap();
    assert_eq!(bundle.records.len(), 1);
    assert_eq!(bundle.records[0].process, "ld");

    let g = rladder(&["gap", traj.to_str().unwrap(), "--f", "coordinate"]);
    assert!(g.status.success(), "{}", String::from_utf8_lossy(&g.stderr));
    let est: serde_json::Value = serde_json::from_slice(&g.stdout).unwrap();
    assert!(est["kappa_hat"].as_f64().unwrap() > 0.0);
}

#[test]
fn zero_levels_is_rejected_with_the_field_path() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "k0.toml",
        "[target]\nkind = \"bimodal\"\neps = 0.2\n[process]\nkind = \"mreld\"\nladder = { scenario = \"synchronized\", k = 0 }\n[run]\nhorizon = 1.0\n",
    );
    let o = rladder(&["sweep", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("process.ladder.k"));

    let swept = write_config(
        tmp.path(),
        "sk0.toml",
        "[target]\nkind = \"bimodal\"\neps = 0.2\n[process]\nkind = \"mreld\"\nladder = { scenario = \"synchronized\", k = 2 }\n[run]\nhorizon = 1.0\n[sweep]\nK = [2, 0]\n",
    );
    let o = rladder(&["sweep", swept.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sweep.K[1]"));
}

#[test]
fn bad_input_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write_config(tmp.path(), "u.toml", "[target]\nkind = \"bimodal\"\neps = 0.2\nepsilon = 1\n[process]\nkind = \"ld\"\n[run]\nhorizon = 1.0\n");
    assert_eq!(rladder(&["sweep", unknown.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(rladder(&["sweep", "/nonexistent/config.toml"]).status.code(), Some(1));
    assert_eq!(rladder(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(rladder(&["--help"]).status.code(), Some(0));
    let big = write_config(
        tmp.path(),
        "big.toml",
        "[target]\nkind = \"bimodal\"\neps = 0.2\n[process]\nkind = \"ld\"\n[run]\nhorizon = 1.0\n[sweep]\neps = [0.1, 0.2, 0.3]\nd = [1, 2, 3]\nmax_cells = 4\n",
    );
    let o = rladder(&["sweep", big.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("9 cells"));
    let empty = tempfile::tempdir().unwrap();
    assert_eq!(rladder(&["report", empty.path().to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn edited_config_echo_is_flagged() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", &SMALL_SWEEP.replace("eps = [0.3, 0.25, 0.2]", "eps = [0.3, 0.25]"));
    let out = tmp.path().join("out");
    assert!(rladder(&["--out", out.to_str().unwrap(), "sweep", cfg.to_str().unwrap()]).status.success());
    let path = out.join("results.json");
    let mut bundle = ResultsBundle::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(bundle.tampered().is_empty());
    bundle.records[1].config.run.horizon = 61.0;
    std::fs::write(&path, bundle.to_json()).unwrap();
    assert_eq!(ResultsBundle::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap().tampered(), vec![1]);
    assert!(rladder(&["report", out.to_str().unwrap()]).status.success());
    assert!(std::fs::read_to_string(out.join("summary.md")).unwrap().contains("Config hash mismatch in cells [1]"));
}

#[test]
fn constants_from_flags() {
    let o = rladder(&["constants", "--eps", "0.2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let kappa = v[0]["bound"]["kappa_log"].as_f64().unwrap();
    assert!(kappa.is_finite() && kappa > 0.0);
    assert_eq!(rladder(&["constants"]).status.code(), Some(1));
}

#[test]
fn shipped_configs_validate() {
    let mut n = 0;
    for entry in std::fs::read_dir(repo_configs()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let text = std::fs::read_to_string(&p).unwrap();
            ExperimentConfig::from_toml(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 3);
}
