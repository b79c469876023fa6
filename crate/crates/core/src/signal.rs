//! Geometry-based stochastic channel model.
//!
//! The received baseband signal of one anchor is the sum of specular
//! components (one per visible VA), diffuse multipath (DM) realized as
//! uncorrelated-scattering taps on the sample grid, and white noise. The DM
//! process is treated as a narrowband interferer: it is filtered around its
//! own carrier and only the part overlapping the receiver band survives.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dsp::{bin_frequency, energy, FftPair};
use crate::error::{MintError, Result};
use crate::geometry::{expected_delay, Point2, VaKey, VirtualAnchor};

/// Roll-off of the root-raised-cosine pulse family.
pub const RRC_ROLLOFF: f64 = 0.6;
const FLAT_GAIN_REF_HZ: f64 = 7e9;

/// Half-span of the truncated pulse in multiples of Tp.
const PULSE_HALF_SPAN: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveformParams {
    /// Pulse duration Tp in seconds.
    pub pulse_duration: f64,
    /// Carrier frequency fc in Hz.
    pub carrier: f64,
}

impl WaveformParams {
    pub fn new(pulse_duration: f64, carrier: f64) -> Result<Self> {
        if !(pulse_duration > 0.0) {
            return Err(MintError::NonPositive("pulse duration"));
        }
        if !(carrier > 0.0) {
            return Err(MintError::NonPositive("carrier frequency"));
        }
        Ok(Self {
            pulse_duration,
            carrier,
        })
    }

    pub fn check_band(&self, lo: f64, hi: f64) -> Result<()> {
        if self.carrier < lo || self.carrier > hi {
            return Err(MintError::Config(format!(
                "carrier {} Hz outside band [{lo}, {hi}]",
                self.carrier
            )));
        }
        Ok(())
    }
}

/// Unit-energy baseband pulse sampled on a grid centered at t = 0.
#[derive(Debug, Clone)]
pub struct Pulse {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub tp: f64,
    pub beta: f64,
    /// Index of the t = 0 sample.
    pub center: usize,
}

impl Pulse {
    /// Wraps arbitrary samples (center index = t = 0) and normalizes them to unit energy.
    pub fn from_samples(samples: Vec<Complex64>, center: usize, sample_rate: f64, tp: f64) -> Result<Self> {
        let e = energy(&samples, sample_rate);
        if !(e > 0.0) {
            return Err(MintError::ZeroEnergy);
        }
        let k = 1.0 / e.sqrt();
        let samples: Vec<Complex64> = samples.into_iter().map(|s| s * k).collect();
        let mut pulse = Self {
            samples,
            sample_rate,
            tp,
            beta: 0.0,
            center,
        };
        pulse.beta = effective_bandwidth(&pulse)?;
        Ok(pulse)
    }

    /// Samples from t = -center/fs onward.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Spectrum of the pulse for an `n`-point transform, t = 0 mapped to index 0.
    pub fn spectrum(&self, fft: &FftPair) -> Vec<Complex64> {
        self.spectrum_shifted(fft, 0.0)
    }

    /// Spectrum of `s(t)·exp(i2π·shift·t)`.
    pub fn spectrum_shifted(&self, fft: &FftPair, shift: f64) -> Vec<Complex64> {
        let n = fft.len();
        assert!(self.len() <= n, "transform shorter than pulse");
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for (i, s) in self.samples.iter().enumerate() {
            let t = (i as f64 - self.center as f64) / self.sample_rate;
            let idx = (i + n - self.center) % n;
            buf[idx] = if shift == 0.0 {
                *s
            } else {
                *s * Complex64::from_polar(1.0, 2.0 * PI * shift * t)
            };
        }
        fft.forward(&mut buf);
        buf
    }
}

/// Root-raised-cosine impulse response with symbol period `t_sym`, unit energy
/// before truncation.
pub fn rrc(t: f64, t_sym: f64, rolloff: f64) -> f64 {
    let x = t / t_sym;
    let norm = 1.0 / t_sym.sqrt();
    if x.abs() < 1e-12 {
        return norm * (1.0 - rolloff + 4.0 * rolloff / PI);
    }
    let sing = 1.0 / (4.0 * rolloff);
    if (x.abs() - sing).abs() < 1e-9 {
        let a = PI / (4.0 * rolloff);
        return norm * rolloff / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * x * (1.0 - rolloff)).sin() + 4.0 * rolloff * x * (PI * x * (1.0 + rolloff)).cos();
    let den = PI * x * (1.0 - (4.0 * rolloff * x).powi(2));
    norm * num / den
}

/// Root-raised-cosine pulse (roll-off 0.6, symbol period Tp), unit energy.
pub fn make_pulse(w: &WaveformParams, sample_rate: f64) -> Result<Pulse> {
    let required = 4.0 / w.pulse_duration;
    if sample_rate < required * (1.0 - 1e-12) {
        return Err(MintError::Undersampled {
            sample_rate,
            required,
        });
    }
    let half = (PULSE_HALF_SPAN * w.pulse_duration * sample_rate).ceil() as usize;
    let samples = (0..=2 * half)
        .map(|i| {
            let t = (i as f64 - half as f64) / sample_rate;
            Complex64::new(rrc(t, w.pulse_duration, RRC_ROLLOFF), 0.0)
        })
        .collect();
    Pulse::from_samples(samples, half, sample_rate, w.pulse_duration)
}

/// RMS bandwidth `sqrt(∫f²|S|² / ∫|S|²)` from a zero-padded DFT of the samples.
pub fn effective_bandwidth(pulse: &Pulse) -> Result<f64> {
    let n = (pulse.len() * 8).max(1024).next_power_of_two();
    let fft = FftPair::new(n);
    let spec = pulse.spectrum(&fft);
    let (mut num, mut den) = (0.0, 0.0);
    for (k, s) in spec.iter().enumerate() {
        let f = bin_frequency(k, n, pulse.sample_rate);
        let p = s.norm_sqr();
        num += f * f * p;
        den += p;
    }
    if !(den > 0.0) {
        return Err(MintError::ZeroEnergy);
    }
    Ok((num / den).sqrt())
}

/// Power delay profile of the diffuse multipath (double exponential with a soft onset).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmProfile {
    pub omega1: f64,
    pub gamma1: f64,
    pub gamma_rise: f64,
    pub chi: f64,
    pub onset: f64,
    /// Interferer carrier (Hz).
    pub carrier: f64,
    /// Interferer two-sided bandwidth (Hz).
    pub bandwidth: f64,
}

impl DmProfile {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega1 >= 0.0) {
            return Err(MintError::Config("DM omega1 must be >= 0".into()));
        }
        if !(self.gamma1 > 0.0) || !(self.gamma_rise > 0.0) {
            return Err(MintError::Config("DM decay constants must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.chi) {
            return Err(MintError::Config("DM chi must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn with_onset(mut self, onset: f64) -> Self {
        self.onset = onset;
        self
    }
}

pub fn dm_pdp(tau: f64, prof: &DmProfile) -> f64 {
    if tau < prof.onset {
        return 0.0;
    }
    let x = tau - prof.onset;
    prof.omega1 / (prof.gamma1 + prof.gamma_rise)
        * (1.0 - prof.chi * (-x / prof.gamma_rise).exp())
        * (-x / prof.gamma1).exp()
}

/// Fraction of the receiver band `[fc ± 1/(2Tp)]` covered by the interferer band.
pub fn interferer_overlap(w: &WaveformParams, prof: &DmProfile) -> f64 {
    let rx_half = 0.5 / w.pulse_duration;
    let lo = (w.carrier - rx_half).max(prof.carrier - prof.bandwidth / 2.0);
    let hi = (w.carrier + rx_half).min(prof.carrier + prof.bandwidth / 2.0);
    ((hi - lo) / (2.0 * rx_half)).clamp(0.0, 1.0)
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic seed for a named sub-stream of `seed`.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(mix64(seed), |acc, &p| mix64(acc ^ mix64(p)))
}

/// Smooth frequency response of one VA: magnitude in [0.25, 1] built from
/// three sinusoids in frequency (periods 500 MHz to 2 GHz), constant phase.
pub fn va_frequency_gain(va: VaKey, fc: f64, scenario_seed: u64) -> Complex64 {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
        scenario_seed,
        &[va.anchor_id as u64, va.va_index as u64],
    ));
    let mut weights = [0.0; 3];
    let mut periods = [0.0; 3];
    let mut phases = [0.0; 3];
    for i in 0..3 {
        weights[i] = rng.random_range(0.2..1.0);
        periods[i] = rng.random_range(500e6..2000e6);
        phases[i] = rng.random_range(0.0..2.0 * PI);
    }
    let total: f64 = weights.iter().sum();
    let ripple: f64 = (0..3)
        .map(|i| weights[i] / total * (2.0 * PI * fc / periods[i] + phases[i]).sin())
        .sum();
    let theta = rng.random_range(0.0..2.0 * PI);
    Complex64::from_polar(0.625 + 0.375 * ripple, theta)
}

/// Static parameters of the synthetic channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub sample_rate: f64,
    /// Measurement duration T (s).
    pub duration: f64,
    /// Path amplitude at the 1 m reference distance with unit gain.
    pub amplitude_ref: f64,
    pub scenario_seed: u64,
    /// Evaluate every VA gain at a fixed reference frequency instead of the
    /// carrier, so SINRs do not depend on the action.
    #[serde(default)]
    pub frequency_flat: bool,
}

impl ChannelConfig {
    pub fn num_samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MpcPath {
    pub va: VaKey,
    pub delay: f64,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub mpcs: Vec<MpcPath>,
    /// DM taps on the sample grid (tap i at delay i/fs); empty without DM.
    pub dm_taps: Vec<Complex64>,
    pub noise_psd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub duration: f64,
    pub waveform: WaveformParams,
}

impl ReceivedSignal {
    pub fn energy(&self) -> f64 {
        energy(&self.samples, self.sample_rate)
    }
}

/// Complex amplitude of the specular path from `va` seen at `p`.
pub fn path_amplitude(cfg: &ChannelConfig, p: Point2, va: &VirtualAnchor, w: &WaveformParams) -> Complex64 {
    let d = p.distance(va.mean).max(1e-3);
    let tau = expected_delay(p, va);
    let f_gain = if cfg.frequency_flat { FLAT_GAIN_REF_HZ } else { w.carrier };
    va_frequency_gain(va.key(), f_gain, cfg.scenario_seed)
        * (cfg.amplitude_ref / d)
        * Complex64::from_polar(1.0, -2.0 * PI * w.carrier * tau)
}

/// Draws the specular paths and DM taps for one measurement.
pub fn realize_channel<R: Rng + ?Sized>(
    cfg: &ChannelConfig,
    p: Point2,
    vas: &[VirtualAnchor],
    w: &WaveformParams,
    prof: Option<&DmProfile>,
    n0: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let mut mpcs = Vec::with_capacity(vas.len());
    for va in vas {
        let delay = expected_delay(p, va);
        if delay >= cfg.duration {
            return Err(MintError::DelayOutOfWindow {
                delay,
                window: cfg.duration,
            });
        }
        mpcs.push(MpcPath {
            va: va.key(),
            delay,
            amplitude: path_amplitude(cfg, p, va, w),
        });
    }
    let dm_taps = match prof {
        Some(prof) if prof.omega1 > 0.0 => {
            let dtau = 1.0 / cfg.sample_rate;
            (0..cfg.num_samples())
                .map(|i| {
                    let var = dm_pdp(i as f64 * dtau, prof) * dtau;
                    if var > 0.0 {
                        complex_normal(rng, var)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect()
        }
        _ => Vec::new(),
    };
    Ok(ChannelRealization {
        mpcs,
        dm_taps,
        noise_psd: n0,
    })
}

/// Circular complex Gaussian with total variance `var`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Transform length used for rendering/estimation of `ns` samples with `pulse`.
pub fn transform_len(ns: usize, pulse: &Pulse) -> usize {
    (ns + pulse.len() + 1).next_power_of_two()
}

/// Renders a realization into sampled baseband and adds noise.
pub fn render<R: Rng + ?Sized>(
    cfg: &ChannelConfig,
    real: &ChannelRealization,
    pulse: &Pulse,
    w: &WaveformParams,
    prof: Option<&DmProfile>,
    rng: &mut R,
) -> ReceivedSignal {
    let ns = cfg.num_samples();
    let n = transform_len(ns, pulse);
    let fft = FftPair::new(n);
    let fs = cfg.sample_rate;
    let spec = pulse.spectrum(&fft);

    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for path in &real.mpcs {
        for (k, xk) in x.iter_mut().enumerate() {
            let f = bin_frequency(k, n, fs);
            *xk += path.amplitude * Complex64::from_polar(1.0, -2.0 * PI * f * path.delay);
        }
    }
    for (xk, sk) in x.iter_mut().zip(&spec) {
        *xk *= sk;
    }

    if let (Some(prof), false) = (prof, real.dm_taps.is_empty()) {
        let shift = prof.carrier - w.carrier;
        let shifted = pulse.spectrum_shifted(&fft, shift);
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[..real.dm_taps.len()].copy_from_slice(&real.dm_taps);
        fft.forward(&mut v);
        for (k, xk) in x.iter_mut().enumerate() {
            let f = bin_frequency(k, n, fs);
            if (f - shift).abs() <= prof.bandwidth / 2.0 {
                *xk += v[k] * shifted[k];
            }
        }
    }

    fft.inverse(&mut x);
    x.truncate(ns);
    if real.noise_psd > 0.0 {
        let var = real.noise_psd * fs;
        for s in x.iter_mut() {
            *s += complex_normal(rng, var);
        }
    }
    ReceivedSignal {
        samples: x,
        sample_rate: fs,
        duration: cfg.duration,
        waveform: *w,
    }
}

/// `r(t) = Σ α_k s(t − τ_k) + (ν ⋆ s)(t) + w(t)` for the VAs in `vas`.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_received<R: Rng + ?Sized>(
    cfg: &ChannelConfig,
    pulse: &Pulse,
    p: Point2,
    vas: &[VirtualAnchor],
    w: &WaveformParams,
    prof: Option<&DmProfile>,
    n0: f64,
    rng: &mut R,
) -> Result<ReceivedSignal> {
    let real = realize_channel(cfg, p, vas, w, prof, n0, rng)?;
    Ok(render(cfg, &real, pulse, w, prof, rng))
}

/// Ground-truth SINR `|α|² / (N0 + Tp·S_ν(τ))` with the interferer PDP
/// weighted by its spectral overlap with the receiver band.
pub fn true_sinr(
    cfg: &ChannelConfig,
    p: Point2,
    va: &VirtualAnchor,
    w: &WaveformParams,
    prof: Option<&DmProfile>,
    n0: f64,
) -> f64 {
    let a2 = path_amplitude(cfg, p, va, w).norm_sqr();
    let dm = prof
        .map(|prof| w.pulse_duration * dm_pdp(expected_delay(p, va), prof) * interferer_overlap(w, prof))
        .unwrap_or(0.0);
    a2 / (n0 + dm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_virtual_anchors, FloorPlan};

    fn cfg() -> ChannelConfig {
        ChannelConfig {
            sample_rate: 16e9,
            duration: 100e-9,
            amplitude_ref: 1.0,
            scenario_seed: 7,
            frequency_flat: false,
        }
    }

    fn wf() -> WaveformParams {
        WaveformParams::new(0.5e-9, 7e9).unwrap()
    }

    fn profile() -> DmProfile {
        DmProfile {
            omega1: 1.1615e-8,
            gamma1: 20e-9,
            gamma_rise: 5e-9,
            chi: 0.98,
            onset: 10e-9,
            carrier: 7e9,
            bandwidth: 2e9,
        }
    }

    #[test]
    fn pulse_has_unit_energy() {
        for tp in [0.25e-9, 0.5e-9, 1e-9] {
            let p = make_pulse(&WaveformParams::new(tp, 7e9).unwrap(), 16e9).unwrap();
            assert!((energy(&p.samples, p.sample_rate) - 1.0).abs() < 1e-9);
            assert!(p.beta > 0.0);
        }
    }

    #[test]
    fn undersampled_pulse_rejected() {
        let err = make_pulse(&wf(), 7e9).unwrap_err();
        assert!(matches!(err, MintError::Undersampled { .. }));
    }

    #[test]
    fn halving_tp_doubles_beta() {
        let a = make_pulse(&WaveformParams::new(0.5e-9, 7e9).unwrap(), 16e9).unwrap();
        let b = make_pulse(&WaveformParams::new(0.25e-9, 7e9).unwrap(), 16e9).unwrap();
        let ratio = b.beta / a.beta;
        assert!((1.8..=2.2).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn beta_is_scale_and_shift_invariant() {
        let p = make_pulse(&wf(), 16e9).unwrap();
        let k = Complex64::new(-3.0, 0.5);
        let scaled = Pulse::from_samples(p.samples.iter().map(|s| s * k).collect(), p.center, 16e9, p.tp).unwrap();
        assert!((scaled.beta - p.beta).abs() < 1e-9 * p.beta);
        let mut shifted = vec![Complex64::new(0.0, 0.0); 5];
        shifted.extend_from_slice(&p.samples);
        let shifted = Pulse::from_samples(shifted, p.center, 16e9, p.tp).unwrap();
        assert!((shifted.beta - p.beta).abs() < 1e-9 * p.beta);
    }

    #[test]
    fn flat_spectrum_beta_closed_form() {
        // band-limited pulse with a flat spectrum over |f| <= B/2
        let (fs, n, b) = (16e9, 4096usize, 2e9);
        let fft = FftPair::new(n);
        let mut spec = vec![Complex64::new(0.0, 0.0); n];
        for (k, s) in spec.iter_mut().enumerate() {
            if bin_frequency(k, n, fs).abs() <= b / 2.0 {
                *s = Complex64::new(1.0, 0.0);
            }
        }
        fft.inverse(&mut spec);
        // move t = 0 to the middle
        let mut samples = spec[n / 2..].to_vec();
        samples.extend_from_slice(&spec[..n / 2]);
        let pulse = Pulse::from_samples(samples, n / 2, fs, 1.0 / b).unwrap();
        let expected = b / (2.0 * 3f64.sqrt());
        assert!((pulse.beta / expected - 1.0).abs() < 0.01, "{} vs {}", pulse.beta, expected);
    }

    #[test]
    fn zero_energy_pulse_rejected() {
        let err = Pulse::from_samples(vec![Complex64::new(0.0, 0.0); 8], 4, 16e9, 0.5e-9).unwrap_err();
        assert_eq!(err, MintError::ZeroEnergy);
    }

    #[test]
    fn pdp_shape() {
        let mut prof = profile();
        assert_eq!(dm_pdp(prof.onset - 1e-12, &prof), 0.0);
        assert!(dm_pdp(prof.onset + 1e-15, &prof) < 1e-4 * prof.omega1 / prof.gamma1 + 0.03 * prof.omega1 / 25e-9);
        prof.chi = 1.0;
        assert!(dm_pdp(prof.onset, &prof).abs() < 1e-30);

        // chi = 0: the integral is omega1·γ1/(γ1+γrise)
        prof.chi = 0.0;
        let dt = 1e-12;
        let integral: f64 = (0..400_000).map(|i| dm_pdp(prof.onset + (i as f64 + 0.5) * dt, &prof) * dt).sum();
        let closed = prof.omega1 * prof.gamma1 / (prof.gamma1 + prof.gamma_rise);
        assert!((integral / closed - 1.0).abs() < 1e-4);
    }

    #[test]
    fn frequency_gain_is_deterministic_and_bounded() {
        let key = VaKey {
            anchor_id: 1,
            va_index: 4,
        };
        assert_eq!(va_frequency_gain(key, 6.3e9, 11), va_frequency_gain(key, 6.3e9, 11));
        let sweep = |seed| -> Vec<Complex64> {
            (0..1000)
                .map(|i| va_frequency_gain(key, 3e9 + i as f64 * 7e6, seed))
                .collect()
        };
        let a = sweep(11);
        assert!(a.iter().all(|g| (0.25 - 1e-12..=1.0 + 1e-12).contains(&g.norm())));
        assert_ne!(a, sweep(12));
    }

    #[test]
    fn overlap_weighting() {
        let prof = profile();
        let at = |fc| interferer_overlap(&WaveformParams::new(0.5e-9, fc).unwrap(), &prof);
        assert!((at(7e9) - 1.0).abs() < 1e-12);
        assert!((at(6e9) - 0.5).abs() < 1e-12);
        assert_eq!(at(9.1e9), 0.0);
    }

    #[test]
    fn true_sinr_examples() {
        let plan = FloorPlan::rectangle(0.0, 0.0, 6.0, 8.0).unwrap();
        let va = build_virtual_anchors(&plan, Point2::new(1.0, 1.0), 0, 0).unwrap()[0].clone();
        let p = Point2::new(4.0, 5.0);
        let c = cfg();
        let a2 = path_amplitude(&c, p, &va, &wf()).norm_sqr();
        assert!((true_sinr(&c, p, &va, &wf(), None, 1e-3) - a2 / 1e-3).abs() < 1e-9 * a2 / 1e-3);
        let prof = profile().with_onset(0.0);
        let dm = 0.5e-9 * dm_pdp(expected_delay(p, &va), &prof);
        assert!((true_sinr(&c, p, &va, &wf(), Some(&prof), 0.0) / (a2 / dm) - 1.0).abs() < 1e-12);
        let c2 = ChannelConfig {
            amplitude_ref: 2.0,
            ..c
        };
        let ratio = true_sinr(&c2, p, &va, &wf(), Some(&prof), 1e-4) / true_sinr(&c, p, &va, &wf(), Some(&prof), 1e-4);
        assert!((ratio - 4.0).abs() < 1e-12);
    }

    #[test]
    fn delay_outside_window_is_error() {
        let plan = FloorPlan::rectangle(0.0, 0.0, 6.0, 8.0).unwrap();
        let mut va = build_virtual_anchors(&plan, Point2::new(1.0, 1.0), 0, 0).unwrap()[0].clone();
        va.mean = Point2::new(40.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pulse = make_pulse(&wf(), 16e9).unwrap();
        let err = synthesize_received(&cfg(), &pulse, Point2::new(1.0, 1.0), &[va], &wf(), None, 0.0, &mut rng);
        assert!(matches!(err, Err(MintError::DelayOutOfWindow { .. })));
    }
}
