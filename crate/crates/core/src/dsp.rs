//! FFT plumbing shared by the synthesizer and the estimator.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Forward/inverse plan pair for one transform length.
pub struct FftPair {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    /// Inverse transform including the 1/N factor.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        let k = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|x| *x *= k);
    }
}

/// Frequency of FFT bin `k` for an `n`-point transform at `fs`.
pub fn bin_frequency(k: usize, n: usize, fs: f64) -> f64 {
    if k < n.div_ceil(2) {
        k as f64 * fs / n as f64
    } else {
        (k as f64 - n as f64) * fs / n as f64
    }
}

pub fn energy(samples: &[Complex64], fs: f64) -> f64 {
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / fs
}
