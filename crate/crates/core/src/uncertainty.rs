//! Position-related information: SINR estimation, range variances, EFIM,
//! CRLB, Gaussian entropy and the per-(VA, frequency bin) SINR memory.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::{E, PI};

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::error::{MintError, Result};
use crate::geometry::{angle_to, ranging_direction, Point2, VaKey, SPEED_OF_LIGHT};

pub const DEFAULT_W_PAST: usize = 40;
pub const DEFAULT_W_INIT: usize = 10;
pub const DEFAULT_SIGMA_INIT: f64 = 0.3;
pub const SINR_FLOOR: f64 = 1e-3;
pub const SINR_CEIL: f64 = 1e6;
/// Unvisited bins borrow the estimate of the nearest visited bin within this distance (Hz).
pub const MEMORY_FALLBACK_HZ: f64 = 200e6;

/// Rician moment matching on `|α|`: returns `ν̂²/σ̂²` clamped to `[1e-3, 1e6]`.
pub fn estimate_sinr_mom(window: &[Complex64], w_init: usize) -> Result<f64> {
    if window.len() < w_init.max(1) {
        return Err(MintError::WindowTooShort {
            len: window.len(),
            required: w_init.max(1),
        });
    }
    let n = window.len() as f64;
    let m2 = window.iter().map(|a| a.norm_sqr()).sum::<f64>() / n;
    let m4 = window.iter().map(|a| a.norm_sqr().powi(2)).sum::<f64>() / n;
    let nu2 = (2.0 * m2 * m2 - m4).max(0.0).sqrt();
    let sigma2 = m2 - nu2;
    if !(sigma2 > 0.0) {
        return Ok(SINR_CEIL);
    }
    Ok((nu2 / sigma2).clamp(SINR_FLOOR, SINR_CEIL))
}

/// `8π²β²/c²`, the information per unit SINR along one ranging direction.
pub fn ranging_information_scale(beta: f64) -> f64 {
    8.0 * PI * PI * beta * beta / (SPEED_OF_LIGHT * SPEED_OF_LIGHT)
}

/// Range variance `(8π²β²/c² · SINR)⁻¹`.
pub fn range_variance(sinr: f64, beta: f64) -> Result<f64> {
    if !(sinr > 0.0) {
        return Err(MintError::NonPositive("sinr"));
    }
    if !(beta > 0.0) {
        return Err(MintError::NonPositive("beta"));
    }
    Ok(1.0 / (ranging_information_scale(beta) * sinr))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efim {
    pub j: Matrix2<f64>,
}

impl Efim {
    pub fn zero() -> Self {
        Self { j: Matrix2::zeros() }
    }
}

impl std::ops::Add for Efim {
    type Output = Efim;
    fn add(self, rhs: Efim) -> Efim {
        Efim { j: self.j + rhs.j }
    }
}

/// `(8π²β²/c²) Σ SINR_k I_r(φ_k)` for VA positions seen from `p`.
/// Entries coinciding with `p` carry no direction and are skipped.
pub fn efim(p: Point2, entries: &[(Point2, f64)], beta: f64) -> Efim {
    let scale = ranging_information_scale(beta);
    let j = entries
        .iter()
        .filter_map(|&(a, sinr)| angle_to(p, a).ok().map(|phi| ranging_direction(phi).m * sinr))
        .fold(Matrix2::zeros(), |acc, m| acc + m);
    Efim { j: j * scale }
}

/// `tr(J⁻¹)`.
pub fn crlb_position(e: &Efim) -> Result<f64> {
    let det = e.j.determinant();
    let scale = e.j.abs().max();
    if !(det.abs() > 1e-12 * scale * scale) || !det.is_finite() {
        return Err(MintError::Singular);
    }
    Ok(e.j.trace() / det)
}

/// `½ ln((2πe)ⁿ det C)` through a Cholesky factor.
pub fn gaussian_entropy(cov: &DMatrix<f64>) -> Result<f64> {
    let n = cov.nrows();
    if n != cov.ncols() || n == 0 {
        return Err(MintError::Dimension("entropy needs a square matrix".into()));
    }
    let chol = cov.clone().cholesky().ok_or(MintError::NotPositiveDefinite)?;
    let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    if !log_det.is_finite() {
        return Err(MintError::NotPositiveDefinite);
    }
    Ok(0.5 * (n as f64 * (2.0 * PI * E).ln() + log_det))
}

/// `sqrt(CRLB / mean range variance)`.
pub fn gdop(e: &Efim, mean_range_var: f64) -> Result<f64> {
    if !(mean_range_var > 0.0) {
        return Err(MintError::NonPositive("mean range variance"));
    }
    Ok((crlb_position(e)? / mean_range_var).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSettings {
    pub w_past: usize,
    pub w_init: usize,
    pub sigma_init: f64,
}

impl Default for SinrSettings {
    fn default() -> Self {
        Self {
            w_past: DEFAULT_W_PAST,
            w_init: DEFAULT_W_INIT,
            sigma_init: DEFAULT_SIGMA_INIT,
        }
    }
}

/// Amplitude window and SINR estimate for one VA at one action bin.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrTrack {
    pub va_key: VaKey,
    pub action_bin: usize,
    amplitude_window: VecDeque<Complex64>,
    capacity: usize,
    w_init: usize,
    pub sinr_hat: Option<f64>,
}

impl SinrTrack {
    pub fn new(va_key: VaKey, action_bin: usize, settings: &SinrSettings) -> Self {
        Self {
            va_key,
            action_bin,
            amplitude_window: VecDeque::with_capacity(settings.w_past),
            capacity: settings.w_past.max(1),
            w_init: settings.w_init,
            sinr_hat: None,
        }
    }

    pub fn push(&mut self, amplitude: Complex64) {
        if self.amplitude_window.len() == self.capacity {
            self.amplitude_window.pop_front();
        }
        self.amplitude_window.push_back(amplitude);
        let window: Vec<Complex64> = self.amplitude_window.iter().copied().collect();
        self.sinr_hat = estimate_sinr_mom(&window, self.w_init).ok();
    }

    pub fn len(&self) -> usize {
        self.amplitude_window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitude_window.is_empty()
    }

    /// Working range variance: the SINR bound once estimated, else `σ²_d,init`.
    pub fn range_var(&self, beta: f64, sigma_init: f64) -> f64 {
        match self.sinr_hat {
            Some(s) => range_variance(s, beta).unwrap_or(sigma_init * sigma_init),
            None => sigma_init * sigma_init,
        }
    }
}

/// Per-(VA, action bin) SINR memory.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrMemory {
    settings: SinrSettings,
    bin_frequencies: Vec<f64>,
    tracks: BTreeMap<(VaKey, usize), SinrTrack>,
    /// Per-VA amplitudes of the last `w_past` steps, across bins.
    recent: BTreeMap<VaKey, VecDeque<(usize, Complex64)>>,
}

impl SinrMemory {
    pub fn new(settings: SinrSettings, bin_frequencies: Vec<f64>) -> Self {
        Self {
            settings,
            bin_frequencies,
            tracks: BTreeMap::new(),
            recent: BTreeMap::new(),
        }
    }

    pub fn settings(&self) -> &SinrSettings {
        &self.settings
    }

    pub fn record(&mut self, va: VaKey, bin: usize, step: usize, amplitude: Complex64) {
        let settings = self.settings;
        self.tracks
            .entry((va, bin))
            .or_insert_with(|| SinrTrack::new(va, bin, &settings))
            .push(amplitude);
        let w = self.recent.entry(va).or_default();
        w.push_back((step, amplitude));
        while w.front().is_some_and(|&(k, _)| k + settings.w_past <= step) {
            w.pop_front();
        }
    }

    pub fn track(&self, va: VaKey, bin: usize) -> Option<&SinrTrack> {
        self.tracks.get(&(va, bin))
    }

    /// SINR estimate for `va` at `bin`, borrowing from the nearest bin with an
    /// estimate within 200 MHz (ties: lower bin).
    pub fn sinr(&self, va: VaKey, bin: usize) -> Option<f64> {
        if let Some(s) = self.track(va, bin).and_then(|t| t.sinr_hat) {
            return Some(s);
        }
        let f0 = *self.bin_frequencies.get(bin)?;
        self.tracks
            .range((va, 0)..=(va, usize::MAX))
            .filter_map(|(&(_, b), t)| {
                let df = (self.bin_frequencies.get(b)? - f0).abs();
                (df <= MEMORY_FALLBACK_HZ * (1.0 + 1e-9)).then_some((df, b, t.sinr_hat?))
            })
            .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
            .map(|(_, _, s)| s)
    }

    /// SINR of `va` over the amplitudes seen in the last `w_past` steps,
    /// whatever bin they were taken at.
    pub fn recent_sinr(&self, va: VaKey, now: usize) -> Option<f64> {
        let w: Vec<Complex64> = self
            .recent
            .get(&va)?
            .iter()
            .filter(|&&(k, _)| k + self.settings.w_past > now)
            .map(|&(_, a)| a)
            .collect();
        estimate_sinr_mom(&w, self.settings.w_init).ok()
    }

    /// Range variance for the tracker at step `now`: from the recent per-VA
    /// window, else `σ²_d,init` (old per-bin estimates are not trusted).
    pub fn tracking_range_var(&self, va: VaKey, now: usize, beta: f64) -> f64 {
        let init = self.settings.sigma_init * self.settings.sigma_init;
        self.recent_sinr(va, now)
            .and_then(|s| range_variance(s, beta).ok())
            .unwrap_or(init)
    }

    /// Range variance predicted for `bin`, used by the planner.
    pub fn range_var(&self, va: VaKey, bin: usize, beta: f64) -> f64 {
        let init = self.settings.sigma_init * self.settings.sigma_init;
        match self.sinr(va, bin) {
            Some(s) => range_variance(s, beta).unwrap_or(init),
            None => init,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::complex_normal;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn mom_constant_window_hits_ceiling() {
        let w = vec![Complex64::new(0.3, 0.4); 20];
        assert_eq!(estimate_sinr_mom(&w, 10).unwrap(), SINR_CEIL);
    }

    #[test]
    fn mom_short_window_is_error() {
        let w = vec![Complex64::new(1.0, 0.0); 5];
        assert!(matches!(estimate_sinr_mom(&w, 10), Err(MintError::WindowTooShort { .. })));
    }

    #[test]
    fn mom_pure_diffuse_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let hits = (0..500)
            .filter(|_| {
                let w: Vec<_> = (0..40).map(|_| complex_normal(&mut rng, 1.0)).collect();
                estimate_sinr_mom(&w, 10).unwrap() <= 0.5
            })
            .count();
        // the moment estimator is noisy at window 40: about half the windows
        assert!((225..=350).contains(&hits), "{hits}");
    }

    #[test]
    fn mom_rician_15db_median() {
        let k = 10f64.powf(1.5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut est: Vec<f64> = (0..500)
            .map(|_| {
                let w: Vec<_> = (0..40)
                    .map(|i| Complex64::from_polar(k.sqrt(), i as f64 * 1.3) + complex_normal(&mut rng, 1.0))
                    .collect();
                10.0 * estimate_sinr_mom(&w, 10).unwrap().log10()
            })
            .collect();
        est.sort_by(f64::total_cmp);
        let median = est[250];
        assert!((median - 15.0).abs() <= 1.5, "median {median} dB");
    }

    #[test]
    fn range_variance_examples() {
        let v = range_variance(100.0, 1e9).unwrap();
        let expected = SPEED_OF_LIGHT.powi(2) / (8.0 * PI * PI * 1e18 * 100.0);
        assert!((v / expected - 1.0).abs() < 1e-12);
        assert!((v - 1.138e-5).abs() < 1e-8);
        assert!((range_variance(400.0, 1e9).unwrap() * 4.0 / v - 1.0).abs() < 1e-12);
        assert!(range_variance(1e300, 1e9).unwrap() < 1e-290);
        assert!(range_variance(0.0, 1e9).is_err());
        assert!(range_variance(1.0, -1.0).is_err());
    }

    #[test]
    fn efim_examples() {
        let p = Point2::new(0.0, 0.0);
        assert_eq!(efim(p, &[], 1e9).j, Matrix2::zeros());
        let s = 50.0;
        let e = efim(p, &[(Point2::new(3.0, 0.0), s), (Point2::new(0.0, -2.0), s)], 1e9);
        let k = ranging_information_scale(1e9) * s;
        assert!((e.j - Matrix2::identity() * k).abs().max() < 1e-9 * k);
        let crlb = crlb_position(&e).unwrap();
        let expected = 2.0 * SPEED_OF_LIGHT.powi(2) / (8.0 * PI * PI * 1e18 * s);
        assert!((crlb / expected - 1.0).abs() < 1e-9);

        let collinear = efim(p, &[(Point2::new(1.0, 1.0), 3.0), (Point2::new(4.0, 4.0), 9.0)], 1e9);
        assert!(collinear.j.determinant().abs() < 1e-12 * collinear.j.trace().powi(2));
        assert_eq!(crlb_position(&collinear), Err(MintError::Singular));
    }

    #[test]
    fn crlb_closed_forms() {
        let e = Efim { j: Matrix2::identity() * 4.0 };
        assert!((crlb_position(&e).unwrap() - 0.5).abs() < 1e-15);
        let d = Efim { j: Matrix2::new(2.0, 0.0, 0.0, 8.0) };
        assert!((crlb_position(&d).unwrap() - (0.5 + 0.125)).abs() < 1e-15);
    }

    #[test]
    fn entropy_closed_forms() {
        let h = gaussian_entropy(&DMatrix::identity(2, 2)).unwrap();
        assert!((h - (2.0 * PI * E).ln()).abs() < 1e-12);
        assert!((h - 2.837877066).abs() < 1e-8);
        let h3 = gaussian_entropy(&(DMatrix::identity(2, 2) * 3.0)).unwrap();
        assert!((h3 - h - 3f64.ln()).abs() < 1e-12);
        let h1 = gaussian_entropy(&DMatrix::from_element(1, 1, 0.7)).unwrap();
        assert!((h1 - 0.5 * (2.0 * PI * E * 0.7).ln()).abs() < 1e-12);
        assert_eq!(
            gaussian_entropy(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0])),
            Err(MintError::NotPositiveDefinite)
        );
    }

    #[test]
    fn gdop_examples() {
        let s = 50.0;
        let p = Point2::new(0.0, 0.0);
        let e = efim(p, &[(Point2::new(3.0, 0.0), s), (Point2::new(0.0, -2.0), s)], 1e9);
        let rv = range_variance(s, 1e9).unwrap();
        assert!((gdop(&e, rv).unwrap() - 2f64.sqrt()).abs() < 1e-9);
        assert!((gdop(&e, 2.0 * rv).unwrap() - 1.0).abs() < 1e-9);
        assert!(gdop(&efim(p, &[(Point2::new(1.0, 0.0), 1.0)], 1e9), 1.0).is_err());
    }

    #[test]
    fn track_uses_default_until_initialized() {
        let settings = SinrSettings::default();
        let key = VaKey {
            anchor_id: 0,
            va_index: 2,
        };
        let mut t = SinrTrack::new(key, 3, &settings);
        for i in 0..settings.w_init - 1 {
            t.push(Complex64::from_polar(1.0, i as f64));
            assert!(t.sinr_hat.is_none());
            assert_eq!(t.range_var(1e9, 0.3), 0.09);
        }
        t.push(Complex64::from_polar(1.1, 0.2));
        let s = t.sinr_hat.unwrap();
        assert_eq!(t.range_var(1e9, 0.3), range_variance(s, 1e9).unwrap());
        for _ in 0..100 {
            t.push(Complex64::new(1.0, 0.0));
        }
        assert_eq!(t.len(), settings.w_past);
    }

    #[test]
    fn memory_falls_back_to_nearby_bins() {
        let bins: Vec<f64> = (0..40).map(|i| 6e9 + i as f64 * 50e6).collect();
        let mut mem = SinrMemory::new(SinrSettings::default(), bins);
        let key = VaKey {
            anchor_id: 1,
            va_index: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 0..20 {
            mem.record(key, 20, k, Complex64::new(2.0, 0.0) + complex_normal(&mut rng, 0.1));
        }
        let s = mem.sinr(key, 20).unwrap();
        assert_eq!(mem.sinr(key, 24), Some(s));
        assert_eq!(mem.sinr(key, 16), Some(s));
        assert_eq!(mem.sinr(key, 25), None);
        assert_eq!(mem.range_var(key, 30, 1e9), 0.09);
        assert_eq!(mem.range_var(key, 22, 1e9), range_variance(s, 1e9).unwrap());
    }

    #[test]
    fn recent_window_spans_bins_and_expires() {
        let bins: Vec<f64> = (0..40).map(|i| 6e9 + i as f64 * 50e6).collect();
        let settings = SinrSettings::default();
        let mut mem = SinrMemory::new(settings, bins);
        let key = VaKey {
            anchor_id: 0,
            va_index: 2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in 0..settings.w_init {
            mem.record(key, k % 3, k, Complex64::new(1.0, 0.0) + complex_normal(&mut rng, 1e-3));
        }
        // No single bin has w_init samples, the per-VA window does.
        assert_eq!(mem.sinr(key, 0), None);
        let now = settings.w_init - 1;
        assert!(mem.recent_sinr(key, now).unwrap() > 100.0);
        assert!(mem.tracking_range_var(key, now, 1e9) < 0.09);
        // Old samples stop counting, even though the bins still remember them.
        for k in 0..settings.w_init {
            mem.record(key, 5, k, Complex64::new(1.0, 0.0) + complex_normal(&mut rng, 1e-3));
        }
        let later = now + settings.w_past;
        assert!(mem.sinr(key, 5).is_some());
        assert_eq!(mem.recent_sinr(key, later), None);
        assert_eq!(mem.tracking_range_var(key, later, 1e9), 0.09);
    }

    fn spd2() -> impl Strategy<Value = DMatrix<f64>> {
        (0.1..5.0f64, 0.1..5.0f64, -1.0..1.0f64).prop_map(|(a, b, r)| {
            let c = r * 0.95 * (a * b).sqrt();
            DMatrix::from_row_slice(2, 2, &[a, c, c, b])
        })
    }

    proptest! {
        #[test]
        fn efim_is_additive(
            pts in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64, 0.1..100.0f64), 0..8),
            split in 0usize..8,
        ) {
            let p = Point2::new(0.3, -0.2);
            let entries: Vec<_> = pts.iter().map(|&(x, y, s)| (Point2::new(x, y), s)).collect();
            let k = split.min(entries.len());
            let whole = efim(p, &entries, 1e9).j;
            let parts = (efim(p, &entries[..k], 1e9) + efim(p, &entries[k..], 1e9)).j;
            prop_assert!((whole - parts).abs().max() <= 1e-12 * whole.abs().max().max(1.0));
        }

        #[test]
        fn entropy_is_monotone(c2 in spd2(), d in spd2()) {
            let c1 = &c2 + &d;
            prop_assert!(gaussian_entropy(&c1).unwrap() >= gaussian_entropy(&c2).unwrap());
        }
    }
}
