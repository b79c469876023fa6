//! Multipath component estimation by matching pursuit.
//!
//! Each iteration correlates the residual `r − r̂_{m−1}` with the pulse on the
//! sample grid (FFT), refines the strongest grid peak of `|α̂(τ)|²` with a
//! 3-point parabola, evaluates `α̂` at the refined delay and subtracts the
//! fitted pulse from the residual. Earlier components are never revisited.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp::{bin_frequency, energy, FftPair};
use crate::error::{MintError, Result};
use crate::geometry::SPEED_OF_LIGHT;
use crate::signal::{transform_len, Pulse, ReceivedSignal};

/// Default number of extracted components per anchor.
pub const DEFAULT_NUM_MPC: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpcEstimate {
    pub index_m: usize,
    pub delay_hat: f64,
    pub amplitude_hat: Complex64,
    pub range_hat: f64,
}

/// Estimates of one time step, one list per anchor.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasurementSet {
    pub time_index_n: usize,
    pub per_anchor: Vec<Vec<MpcEstimate>>,
}

/// Shared transform state for one (signal length, pulse) pair.
struct Correlator {
    fft: FftPair,
    spec_conj: Vec<Complex64>,
    freqs: Vec<f64>,
    ns: usize,
    fs: f64,
}

impl Correlator {
    fn new(ns: usize, pulse: &Pulse) -> Self {
        let n = transform_len(ns, pulse);
        let fft = FftPair::new(n);
        let spec_conj = pulse.spectrum(&fft).into_iter().map(|s| s.conj()).collect();
        let freqs = (0..n).map(|k| bin_frequency(k, n, pulse.sample_rate)).collect();
        Self {
            fft,
            spec_conj,
            freqs,
            ns,
            fs: pulse.sample_rate,
        }
    }

    fn spectrum_of(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.fft.len()];
        buf[..x.len()].copy_from_slice(x);
        self.fft.forward(&mut buf);
        buf
    }

    /// `α̂(n/fs)` for every grid delay `n < ns`.
    fn grid_correlation(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = spec.iter().zip(&self.spec_conj).map(|(a, b)| a * b).collect();
        self.fft.inverse(&mut buf);
        buf.truncate(self.ns);
        let k = 1.0 / self.fs;
        buf.iter_mut().for_each(|x| *x *= k);
        buf
    }

    /// `α̂(τ) = ∫ e(t) s*(t − τ) dt` at an arbitrary delay.
    fn correlation_at(&self, spec: &[Complex64], tau: f64) -> Complex64 {
        let n = self.fft.len() as f64;
        let sum: Complex64 = spec
            .iter()
            .zip(&self.spec_conj)
            .zip(&self.freqs)
            .map(|((a, b), f)| a * b * Complex64::from_polar(1.0, 2.0 * PI * f * tau))
            .sum();
        sum / (n * self.fs)
    }

    /// `s(t − τ)` on the first `ns` samples.
    fn delayed_pulse(&self, tau: f64) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = self
            .spec_conj
            .iter()
            .zip(&self.freqs)
            .map(|(s, f)| s.conj() * Complex64::from_polar(1.0, -2.0 * PI * f * tau))
            .collect();
        self.fft.inverse(&mut buf);
        buf.truncate(self.ns);
        buf
    }
}

fn check_pulse(r: &ReceivedSignal, pulse: &Pulse) -> Result<()> {
    if (r.sample_rate - pulse.sample_rate).abs() > 1e-6 * r.sample_rate {
        return Err(MintError::Dimension("pulse and signal sample rates differ".into()));
    }
    Ok(())
}

/// Extracts exactly `m` components from `r`.
///
/// Grid delays closer than one sample to an already extracted delay are
/// skipped, so delays within one call are pairwise at least one sample apart.
/// Equal peak magnitudes resolve to the smallest delay.
pub fn matching_pursuit(r: &ReceivedSignal, pulse: &Pulse, m: usize) -> Result<Vec<MpcEstimate>> {
    check_pulse(r, pulse)?;
    let ns = r.samples.len();
    if m == 0 {
        return Err(MintError::NonPositive("number of components"));
    }
    if m > ns {
        return Err(MintError::TooManyComponents {
            requested: m,
            grid: ns,
        });
    }
    let corr = Correlator::new(ns, pulse);
    let fs = r.sample_rate;
    let mut residual = r.samples.clone();
    let mut out: Vec<MpcEstimate> = Vec::with_capacity(m);

    for index_m in 0..m {
        let spec = corr.spectrum_of(&residual);
        let grid: Vec<f64> = corr.grid_correlation(&spec).iter().map(|c| c.norm_sqr()).collect();

        let taken = |i: usize| out.iter().any(|e| (i as f64 - e.delay_hat * fs).abs() < 1.0);
        let mut best: Option<usize> = None;
        for (i, &v) in grid.iter().enumerate() {
            if taken(i) {
                continue;
            }
            if best.is_none_or(|b| v > grid[b]) {
                best = Some(i);
            }
        }
        let Some(i) = best else {
            return Err(MintError::TooManyComponents {
                requested: m,
                grid: ns,
            });
        };

        let mut offset = 0.0;
        if i > 0 && i + 1 < ns {
            let (y0, y1, y2) = (grid[i - 1], grid[i], grid[i + 1]);
            let den = y0 - 2.0 * y1 + y2;
            if den < 0.0 {
                offset = (0.5 * (y0 - y2) / den).clamp(-0.5, 0.5);
            }
        }
        let delay_hat = (i as f64 + offset) / fs;
        let amplitude_hat = corr.correlation_at(&spec, delay_hat);
        if amplitude_hat.norm_sqr() > 0.0 {
            for (e, s) in residual.iter_mut().zip(corr.delayed_pulse(delay_hat)) {
                *e -= amplitude_hat * s;
            }
        }
        out.push(MpcEstimate {
            index_m,
            delay_hat,
            amplitude_hat,
            range_hat: SPEED_OF_LIGHT * delay_hat,
        });
    }
    Ok(out)
}

/// `∫ |r − Σ α̂_m s(t − τ̂_m)|² dt` on the sample grid.
pub fn residual_energy(r: &ReceivedSignal, estimates: &[MpcEstimate], pulse: &Pulse) -> f64 {
    let corr = Correlator::new(r.samples.len(), pulse);
    let mut residual = r.samples.clone();
    for est in estimates {
        if est.amplitude_hat.norm_sqr() == 0.0 {
            continue;
        }
        for (e, s) in residual.iter_mut().zip(corr.delayed_pulse(est.delay_hat)) {
            *e -= est.amplitude_hat * s;
        }
    }
    energy(&residual, r.sample_rate)
}

/// Delays/amplitudes of the pulse itself shifted to `tau` on the signal grid.
pub fn pulse_on_grid(pulse: &Pulse, ns: usize, tau: f64) -> Vec<Complex64> {
    Correlator::new(ns, pulse).delayed_pulse(tau)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{make_pulse, WaveformParams};
    use proptest::prelude::*;

    fn setup() -> (Pulse, WaveformParams) {
        let w = WaveformParams::new(0.5e-9, 7e9).unwrap();
        (make_pulse(&w, 16e9).unwrap(), w)
    }

    fn signal(pulse: &Pulse, w: WaveformParams, paths: &[(f64, Complex64)]) -> ReceivedSignal {
        let mut samples = vec![Complex64::new(0.0, 0.0); 1600];
        for &(tau, a) in paths {
            for (x, s) in samples.iter_mut().zip(pulse_on_grid(pulse, 1600, tau)) {
                *x += a * s;
            }
        }
        ReceivedSignal {
            samples,
            sample_rate: 16e9,
            duration: 100e-9,
            waveform: w,
        }
    }

    #[test]
    fn zero_signal_gives_zero_amplitudes() {
        let (pulse, w) = setup();
        let r = signal(&pulse, w, &[]);
        let est = matching_pursuit(&r, &pulse, 2).unwrap();
        assert_eq!(est.len(), 2);
        assert!(est.iter().all(|e| e.amplitude_hat == Complex64::new(0.0, 0.0)));
        assert_eq!(est[0].delay_hat, 0.0);
    }

    #[test]
    fn too_many_components_is_error() {
        let (pulse, w) = setup();
        let mut r = signal(&pulse, w, &[]);
        r.samples.truncate(3);
        assert!(matches!(
            matching_pursuit(&r, &pulse, 4),
            Err(MintError::TooManyComponents { .. })
        ));
    }

    #[test]
    fn residual_of_empty_estimate_is_signal_energy() {
        let (pulse, w) = setup();
        let r = signal(&pulse, w, &[(20e-9, Complex64::new(0.3, -0.1))]);
        assert!((residual_energy(&r, &[], &pulse) - r.energy()).abs() < 1e-15);
    }

    #[test]
    fn exact_single_path_leaves_no_residual() {
        let (pulse, w) = setup();
        let r = signal(&pulse, w, &[(31.25e-9, Complex64::new(0.8, 0.2))]);
        let est = matching_pursuit(&r, &pulse, 1).unwrap();
        assert!(residual_energy(&r, &est, &pulse) <= 1e-6 * r.energy());
    }

    #[test]
    fn range_is_scaled_delay() {
        let (pulse, w) = setup();
        let r = signal(&pulse, w, &[(12.3e-9, Complex64::new(1.0, 0.0))]);
        for e in matching_pursuit(&r, &pulse, 3).unwrap() {
            assert_eq!(e.range_hat, SPEED_OF_LIGHT * e.delay_hat);
        }
    }

    #[test]
    fn delays_are_one_sample_apart() {
        let (pulse, w) = setup();
        let r = signal(&pulse, w, &[(12.3e-9, Complex64::new(1.0, 0.0)), (14.0e-9, Complex64::new(0.0, 0.5))]);
        let est = matching_pursuit(&r, &pulse, 12).unwrap();
        for (i, a) in est.iter().enumerate() {
            for b in &est[i + 1..] {
                assert!((a.delay_hat - b.delay_hat).abs() * 16e9 >= 0.5);
            }
        }
    }

    fn paths_strategy() -> impl Strategy<Value = Vec<(f64, Complex64)>> {
        prop::collection::vec((5e-9..90e-9f64, -1.0..1.0f64, -1.0..1.0f64), 1..5)
            .prop_map(|v| v.into_iter().map(|(t, re, im)| (t, Complex64::new(re, im))).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn residual_is_monotone(paths in paths_strategy()) {
            let (pulse, w) = setup();
            let r = signal(&pulse, w, &paths);
            let est = matching_pursuit(&r, &pulse, 8).unwrap();
            let mut prev = r.energy();
            for m in 1..=est.len() {
                let e = residual_energy(&r, &est[..m], &pulse);
                prop_assert!(e <= prev * (1.0 + 1e-12) + 1e-30);
                prev = e;
            }
        }

        #[test]
        fn scale_equivariance(paths in paths_strategy(), re in -2.0..2.0f64, im in -2.0..2.0f64) {
            prop_assume!(re.hypot(im) > 0.1);
            let k = Complex64::new(re, im);
            let (pulse, w) = setup();
            let r = signal(&pulse, w, &paths);
            let mut rk = r.clone();
            rk.samples.iter_mut().for_each(|s| *s *= k);
            let a = matching_pursuit(&r, &pulse, 4).unwrap();
            let b = matching_pursuit(&rk, &pulse, 4).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x.delay_hat - y.delay_hat).abs() < 1e-15);
                prop_assert!((x.amplitude_hat * k - y.amplitude_hat).norm() < 1e-9 * (1.0 + y.amplitude_hat.norm()));
            }
        }

        #[test]
        fn shift_equivariance(paths in paths_strategy(), shift in 1usize..40) {
            let (pulse, w) = setup();
            prop_assume!(paths.iter().all(|(_, a)| a.norm() > 0.1));
            let paths: Vec<_> = paths.into_iter().map(|(t, a)| (t.min(80e-9), a)).collect();
            let r = signal(&pulse, w, &paths);
            let mut shifted = r.clone();
            shifted.samples.rotate_right(shift);
            shifted.samples[..shift].iter_mut().for_each(|s| *s = Complex64::new(0.0, 0.0));
            let a = matching_pursuit(&r, &pulse, 1).unwrap();
            let b = matching_pursuit(&shifted, &pulse, 1).unwrap();
            prop_assert!(((b[0].delay_hat - a[0].delay_hat) * 16e9 - shift as f64).abs() < 1e-6);
        }
    }
}
