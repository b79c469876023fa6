//! Aggregate statistics over Monte Carlo runs.

use serde::{Deserialize, Serialize};

use super::pac::RunResult;

pub const DEFAULT_QUANTILES: [f64; 3] = [0.5, 0.9, 0.95];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCdf {
    pub sorted_errors: Vec<f64>,
    /// `(q, value)` pairs.
    pub quantiles: Vec<(f64, f64)>,
}

impl ErrorCdf {
    /// Empirical CDF value at `x`.
    pub fn at(&self, x: f64) -> f64 {
        if self.sorted_errors.is_empty() {
            return 0.0;
        }
        let k = self.sorted_errors.partition_point(|&e| e <= x);
        k as f64 / self.sorted_errors.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub runs: usize,
    pub steps: usize,
    pub error_cdf: ErrorCdf,
    pub mean_error_m: f64,
    pub median_error_m: f64,
    pub entropy_mean: Vec<f64>,
    pub entropy_std: Vec<f64>,
    pub carrier_mean_hz: Vec<f64>,
}

/// Linear-interpolation quantile of sorted data (`q` in [0, 1]).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

/// Deterministic fold in run order.
pub fn summarize(results: &[RunResult], quantiles: &[f64]) -> MetricsSummary {
    let steps = results.iter().map(|r| r.steps.len()).max().unwrap_or(0);
    let mut errors: Vec<f64> = results.iter().flat_map(|r| r.steps.iter().map(|s| s.error_m)).collect();
    errors.sort_by(f64::total_cmp);
    let n = errors.len().max(1) as f64;
    let mean_error_m = errors.iter().sum::<f64>() / n;
    let median_error_m = quantile(&errors, 0.5);

    let mut entropy_mean = vec![0.0; steps];
    let mut entropy_std = vec![0.0; steps];
    let mut carrier_mean_hz = vec![0.0; steps];
    for k in 0..steps {
        let hs: Vec<f64> = results.iter().filter_map(|r| r.steps.get(k)).map(|s| s.entropy_nats).collect();
        let fs: Vec<f64> = results.iter().filter_map(|r| r.steps.get(k)).map(|s| s.fc_hz).collect();
        let m = hs.len() as f64;
        let mu = hs.iter().sum::<f64>() / m;
        entropy_mean[k] = mu;
        entropy_std[k] = (hs.iter().map(|h| (h - mu).powi(2)).sum::<f64>() / m).sqrt();
        carrier_mean_hz[k] = fs.iter().sum::<f64>() / fs.len() as f64;
    }
    MetricsSummary {
        runs: results.len(),
        steps,
        error_cdf: ErrorCdf {
            quantiles: quantiles.iter().map(|&q| (q, quantile(&errors, q))).collect(),
            sorted_errors: errors,
        },
        mean_error_m,
        median_error_m,
        entropy_mean,
        entropy_std,
        carrier_mean_hz,
    }
}
