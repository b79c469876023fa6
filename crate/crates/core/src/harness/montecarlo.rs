//! Seeded Monte Carlo driver.

use rayon::prelude::*;

use super::config::ScenarioConfig;
use super::metrics::{summarize, MetricsSummary, DEFAULT_QUANTILES};
use super::pac::{run_pac_loop, RunResult, Scenario};
use crate::error::{MintError, Result};

/// Runs seeds `base_seed + i` for `i < n_runs`; results are in run order
/// whatever the thread count (`threads == 1` runs serially).
pub fn run_monte_carlo(cfg: &ScenarioConfig, n_runs: usize) -> Result<(Vec<RunResult>, MetricsSummary)> {
    if n_runs == 0 {
        return Err(MintError::Config("n_runs must be >= 1".into()));
    }
    let sc = Scenario::new(cfg)?;
    let base = cfg.monte_carlo.base_seed;
    let job = |i: usize| run_pac_loop(&sc, i, base.wrapping_add(i as u64));
    let results: Vec<RunResult> = match cfg.monte_carlo.threads {
        1 => (0..n_runs).map(job).collect::<Result<_>>()?,
        0 => (0..n_runs).into_par_iter().map(job).collect::<Result<_>>()?,
        t => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| MintError::Config(format!("thread pool: {e}")))?
            .install(|| (0..n_runs).into_par_iter().map(job).collect::<Result<_>>())?,
    };
    let summary = summarize(&results, &DEFAULT_QUANTILES);
    Ok((results, summary))
}
