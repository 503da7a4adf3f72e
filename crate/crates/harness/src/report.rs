//! Plots and a markdown summary from a results bundle or a sweep CSV.

use crate::output::write_atomic;
use crate::run::{CellStatus, ResultsBundle};
use crate::svg::{fmt_num, Axis, Mark, Plot, Series};
use crate::sweep::{self, SweepRow};
use crate::HarnessError;
use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};

/// Least-squares line `y = a + b x`: `(slope, intercept, R²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let b = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((b, my - b * mx, r2))
}

struct Source {
    rows: Vec<SweepRow>,
    bundle: Option<ResultsBundle>,
    log_axes: bool,
}

fn load(dir: &Path) -> Result<Source, HarnessError> {
    let json = dir.join("results.json");
    let csv = dir.join("sweep.csv");
    let (rows, bundle) = if json.exists() {
        let text = std::fs::read_to_string(&json).map_err(|e| HarnessError::io(&json, e))?;
        let b = ResultsBundle::from_json(&text)?;
        (sweep::rows(&b), Some(b))
    } else if csv.exists() {
        let text = std::fs::read_to_string(&csv).map_err(|e| HarnessError::io(&csv, e))?;
        (sweep::from_csv(&text)?, None)
    } else {
        return Err(HarnessError::Input(format!("{} has neither results.json nor sweep.csv", dir.display())));
    };
    if rows.is_empty() {
        return Err(HarnessError::EmptyBundle(dir.display().to_string()));
    }
    let log_axes = bundle.as_ref().is_none_or(|b| b.config.output.log_axes);
    Ok(Source { rows, bundle, log_axes })
}

fn by_process(rows: &[SweepRow]) -> BTreeMap<String, Vec<&SweepRow>> {
    let mut m: BTreeMap<String, Vec<&SweepRow>> = BTreeMap::new();
    for r in rows {
        m.entry(r.process.clone()).or_default().push(r);
    }
    m
}

fn passage_plot(src: &Source) -> Plot {
    let mut series = Vec::new();
    let mut notes = Vec::new();
    for (process, rows) in by_process(&src.rows) {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.passage_mean.filter(|&p| p > 0.0).map(|p| (1.0 / (r.eps * r.eps), p)))
            .collect();
        if pts.is_empty() {
            continue;
        }
        let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
        if let Some((b, a, r2)) = linear_fit(&xs, &ys) {
            let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
            series.push(Series {
                name: format!("{process} fit"),
                points: vec![(lo, (a + b * lo).exp()), (hi, (a + b * hi).exp())],
                mark: Mark::Line,
            });
            notes.push(format!("{process}: slope {}, R² {}", fmt_num(b), fmt_num(r2)));
        }
        series.push(Series { name: format!("{process} mean"), points: pts, mark: Mark::Points });
    }
    Plot {
        title: "First passage between modes".into(),
        x: Axis::linear("1/ε² [1/width²]"),
        y: Axis::log("mean passage time [time units]"),
        series,
        timestamp: None,
        note: (!notes.is_empty()).then(|| notes.join("; ")),
    }
}

fn iat_plot(src: &Source) -> Plot {
    let series = by_process(&src.rows)
        .into_iter()
        .filter_map(|(process, rows)| {
            let mut pts: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.iat_mode_indicator.map(|v| (r.eps, v))).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            (!pts.is_empty()).then_some(Series { name: process, points: pts, mark: Mark::LinePoints })
        })
        .collect();
    let label = "IAT of mode indicator [time units]";
    Plot {
        title: "Integrated autocorrelation time".into(),
        x: Axis::linear("ε [width]"),
        y: if src.log_axes { Axis::log(label) } else { Axis::linear(label) },
        series,
        timestamp: None,
        note: None,
    }
}

fn acceptance_plot(src: &Source) -> Plot {
    let mut series = Vec::new();
    let mut note = None;
    match &src.bundle {
        Some(b) => {
            for r in &b.records {
                let acc = r.acceptance();
                if acc.is_empty() {
                    continue;
                }
                series.push(Series {
                    name: format!("cell {} ε={} K={}", r.cell_id, fmt_num(r.eps), r.k),
                    points: acc.iter().enumerate().map(|(k, &a)| (k as f64, a)).collect(),
                    mark: Mark::LinePoints,
                });
            }
        }
        None => note = Some("per-pair rates need results.json".to_string()),
    }
    Plot {
        title: "Swap acceptance by level".into(),
        x: Axis::linear("pair k (levels k, k+1)"),
        y: Axis::linear("acceptance rate [fraction]"),
        series,
        timestamp: None,
        note,
    }
}

/// Both sides on `log10 κ`: the bounds overflow `f64` long before they
/// become uninformative.
fn bound_plot(src: &Source) -> Plot {
    let ln10 = std::f64::consts::LN_10;
    let bound: Vec<(f64, f64)> =
        src.rows.iter().filter_map(|r| r.kappa_bound_log.map(|b| (r.cell_id as f64, b / ln10))).collect();
    let rayleigh: Vec<(f64, f64)> = src
        .rows
        .iter()
        .filter_map(|r| r.kappa_hat_rayleigh.map(|k| (r.cell_id as f64, (k + 3.0 * r.kappa_hat_se.unwrap_or(0.0)).log10())))
        .collect();
    let iat: Vec<(f64, f64)> =
        src.rows.iter().filter_map(|r| r.iat_mode_indicator.map(|v| (r.cell_id as f64, (v / 2.0).log10()))).collect();
    let mut series = Vec::new();
    for (name, pts) in [("theory bound", bound), ("Rayleigh κ̂ + 3 SE", rayleigh), ("IAT/2", iat)] {
        if !pts.is_empty() {
            series.push(Series { name: name.into(), points: pts, mark: Mark::Points });
        }
    }
    Plot {
        title: "Poincaré constant: bound vs estimate".into(),
        x: Axis::linear("cell id"),
        y: Axis::linear("log10 κ [time units]"),
        series,
        timestamp: None,
        note: None,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_else(|| "".into())
}

fn summary(src: &Source, stamp: Option<&str>) -> String {
    let mut s = String::from("# Sweep summary\n\n");
    if let Some(t) = stamp {
        let _ = writeln!(s, "Generated {t}.\n");
    }
    let failed = src.rows.iter().filter(|r| r.status == CellStatus::Failed).count();
    let _ = writeln!(s, "{} cells, {} failed.\n", src.rows.len(), failed);
    let checked: Vec<&SweepRow> =
        src.rows.iter().filter(|r| r.kappa_bound_log.is_some() && r.kappa_hat_rayleigh.is_some()).collect();
    if !checked.is_empty() {
        let below = checked
            .iter()
            .filter(|r| {
                let k = r.kappa_hat_rayleigh.unwrap() + 3.0 * r.kappa_hat_se.unwrap_or(0.0);
                k.ln() <= r.kappa_bound_log.unwrap()
            })
            .count();
        let _ = writeln!(s, "Rayleigh estimate (+3 SE) below the theory bound in {below} of {} cells.\n", checked.len());
    }
    s.push_str("| cell | process | ε | d | K | τ_top | ρ | h | ln κ bound | IAT | IAT SE | κ̂ Rayleigh | accept min | accept max | passage | censored | status |\n");
    s.push_str("|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|---|\n");
    for r in &src.rows {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {:?} |",
            r.cell_id,
            r.process,
            fmt_num(r.eps),
            r.d,
            r.k,
            opt(r.tau_top),
            opt(r.rho),
            opt(r.step),
            opt(r.kappa_bound_log),
            opt(r.iat_mode_indicator),
            opt(r.iat_se),
            opt(r.kappa_hat_rayleigh),
            opt(r.swap_accept_min),
            opt(r.swap_accept_max),
            opt(r.passage_mean),
            r.censored.map(|c| c.to_string()).unwrap_or_default(),
            r.status,
        );
    }
    if let Some(b) = &src.bundle {
        let failures: Vec<_> = b.records.iter().filter_map(|r| r.reason.as_ref().map(|why| (r.cell_id, why))).collect();
        if !failures.is_empty() {
            s.push_str("\n## Failed cells\n\n");
            for (id, why) in failures {
                let _ = writeln!(s, "- cell {id}: {why}");
            }
        }
        let tampered = b.tampered();
        if !tampered.is_empty() {
            let _ = writeln!(s, "\nConfig hash mismatch in cells {tampered:?}.");
        }
    }
    s
}

/// Writes `passage.svg`, `iat.svg`, `acceptance.svg`, `bounds.svg` and
/// `summary.md` into `dir` and returns their paths.
pub fn report(dir: &Path, timestamp: Option<String>) -> Result<Vec<PathBuf>, HarnessError> {
    let src = load(dir)?;
    let mut written = Vec::new();
    for (name, mut plot) in [
        ("passage.svg", passage_plot(&src)),
        ("iat.svg", iat_plot(&src)),
        ("acceptance.svg", acceptance_plot(&src)),
        ("bounds.svg", bound_plot(&src)),
    ] {
        plot.timestamp = timestamp.clone();
        let path = dir.join(name);
        write_atomic(&path, plot.render().as_bytes())?;
        written.push(path);
    }
    let path = dir.join("summary.md");
    write_atomic(&path, summary(&src, timestamp.as_deref()).as_bytes())?;
    written.push(path);
    Ok(written)
}

/// `unix <seconds>`, for the generated-at stamp.
pub fn now_stamp() -> String {
    let secs = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("unix {secs}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_a_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 0.5 + 2.0 * x).collect();
        let (b, a, r2) = linear_fit(&xs, &ys).unwrap();
        assert!((b - 2.0).abs() < 1e-12 && (a - 0.5).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn empty_sweep_is_refused() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("sweep.csv"), "cell_id,eps\n").unwrap();
        assert!(matches!(report(dir.path(), None), Err(HarnessError::EmptyBundle(_))));
        let empty = tempfile::tempdir().unwrap();
        assert!(report(empty.path(), None).is_err());
    }
}
