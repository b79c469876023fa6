//! Result files: `runs.csv`, `summary.json`, `config_resolved.json`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::metrics::MetricsSummary;
use super::config::Mode;
use super::pac::{RunResult, StepRecord};
use crate::geometry::Point2;

pub const RUNS_CSV: &str = "runs.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const CONFIG_JSON: &str = "config_resolved.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub run_id: usize,
    pub step: usize,
    pub truth_x: f64,
    pub truth_y: f64,
    pub est_x: f64,
    pub est_y: f64,
    pub error_m: f64,
    pub entropy_nats: f64,
    pub fc_hz: f64,
    pub n_assoc: usize,
    pub reward: f64,
}

pub fn rows(results: &[RunResult]) -> Vec<CsvRow> {
    results
        .iter()
        .flat_map(|r| {
            r.steps.iter().map(move |s| CsvRow {
                run_id: r.run_id,
                step: s.step,
                truth_x: s.truth.x,
                truth_y: s.truth.y,
                est_x: s.estimate.x,
                est_y: s.estimate.y,
                error_m: s.error_m,
                entropy_nats: s.entropy_nats,
                fc_hz: s.fc_hz,
                n_assoc: s.n_assoc,
                reward: s.reward,
            })
        })
        .collect()
}

pub fn write_runs_csv(path: &Path, results: &[RunResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in rows(results) {
        w.serialize(row).with_context(|| format!("writing {}", path.display()))?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<CsvRow>, _>>()
        .with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Writes all three files into `out_dir` (created if missing).
pub fn emit_results(
    results: &[RunResult],
    summary: &MetricsSummary,
    cfg: &ScenarioConfig,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let runs = out_dir.join(RUNS_CSV);
    let summ = out_dir.join(SUMMARY_JSON);
    let conf = out_dir.join(CONFIG_JSON);
    write_runs_csv(&runs, results)?;
    write_json(&summ, summary)?;
    write_json(&conf, cfg)?;
    Ok(vec![runs, summ, conf])
}

/// Rebuilds per-run step records from CSV rows (rows grouped by `run_id`,
/// in file order).
pub fn results_from_rows(rows: &[CsvRow], mode: Mode) -> Vec<RunResult> {
    let mut out: Vec<RunResult> = Vec::new();
    for r in rows {
        if out.last().map(|x| x.run_id) != Some(r.run_id) {
            out.push(RunResult {
                run_id: r.run_id,
                seed: 0,
                mode,
                steps: Vec::new(),
                greedy_bins: Vec::new(),
            });
        }
        let run = out.last_mut().expect("pushed above");
        run.steps.push(StepRecord {
            step: r.step,
            truth: Point2::new(r.truth_x, r.truth_y),
            estimate: Point2::new(r.est_x, r.est_y),
            error_m: r.error_m,
            entropy_nats: r.entropy_nats,
            fc_hz: r.fc_hz,
            n_assoc: r.n_assoc,
            reward: r.reward,
        });
    }
    out
}
