//! Scenario configuration (TOML) with every default materialized.

use serde::{Deserialize, Serialize};

use crate::association::{ClutterModel, DEFAULT_CLUTTER_RATE, DEFAULT_PD, DEFAULT_P_GATE};
use crate::chest::DEFAULT_NUM_MPC;
use crate::cognition::{ActionSpace, RlParams};
use crate::error::{MintError, Result};
use crate::geometry::{FloorPlan, Point2, DEFAULT_VA_SIGMA};
use crate::signal::{ChannelConfig, DmProfile, WaveformParams};
use crate::tracker::MotionModel;
use crate::uncertainty::{SinrSettings, DEFAULT_SIGMA_INIT, DEFAULT_W_INIT, DEFAULT_W_PAST};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fixed,
    #[default]
    Cognitive,
}

impl std::str::FromStr for Mode {
    type Err = MintError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed" => Ok(Mode::Fixed),
            "cognitive" => Ok(Mode::Cognitive),
            other => Err(MintError::Config(format!("unknown mode `{other}` (expected fixed|cognitive)"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Fixed => "fixed",
            Mode::Cognitive => "cognitive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoomConfig {
    /// Wall segments `[[x1, y1], [x2, y2]]`.
    pub walls: Vec<[[f64; 2]; 2]>,
}

impl Default for RoomConfig {
    fn default() -> Self {
        let (x1, y1) = (6.2, 8.8);
        Self {
            walls: vec![
                [[0.0, 0.0], [x1, 0.0]],
                [[x1, 0.0], [x1, y1]],
                [[x1, y1], [0.0, y1]],
                [[0.0, y1], [0.0, 0.0]],
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectoryConfig {
    /// Polyline resampled to `steps` points equally spaced in arc length.
    pub waypoints: Vec<[f64; 2]>,
    pub steps: usize,
    /// Explicit positions; overrides `waypoints` when non-empty.
    pub positions: Vec<[f64; 2]>,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        Self {
            waypoints: rounded_corners(&[[1.5, 1.5], [4.5, 1.5], [4.5, 6.5], [2.0, 6.5], [2.0, 3.0]], 0.8, 8),
            steps: 200,
            positions: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveformConfig {
    pub pulse_duration: f64,
    pub initial_fc: f64,
    pub fc_spacing: f64,
    pub num_bins: usize,
    pub band_lo: f64,
    pub band_hi: f64,
}

impl Default for WaveformConfig {
    fn default() -> Self {
        Self {
            pulse_duration: 0.5e-9,
            initial_fc: 7e9,
            fc_spacing: 50e6,
            num_bins: 40,
            band_lo: 3e9,
            band_hi: 10e9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub sample_rate: f64,
    pub duration: f64,
    pub amplitude_ref: f64,
    pub noise_psd: f64,
    pub scenario_seed: u64,
    pub frequency_flat: bool,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self {
            sample_rate: 16e9,
            duration: 100e-9,
            amplitude_ref: 7e-5,
            noise_psd: 4.9e-13,
            scenario_seed: 7,
            frequency_flat: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InterfererConfig {
    pub enabled: bool,
    pub omega1: f64,
    pub gamma1: f64,
    pub gamma_rise: f64,
    pub chi: f64,
    pub carrier: f64,
    pub bandwidth: f64,
    /// Inclusive step interval with the interferer switched on.
    pub active_steps: [usize; 2],
}

impl Default for InterfererConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            omega1: 1.1615e-8,
            gamma1: 20e-9,
            gamma_rise: 5e-9,
            chi: 0.98,
            carrier: 7e9,
            bandwidth: 2e9,
            active_steps: [80, 140],
        }
    }
}

impl InterfererConfig {
    pub fn profile(&self) -> DmProfile {
        DmProfile {
            omega1: self.omega1,
            gamma1: self.gamma1,
            gamma_rise: self.gamma_rise,
            chi: self.chi,
            onset: 0.0,
            carrier: self.carrier,
            bandwidth: self.bandwidth,
        }
    }

    pub fn is_active(&self, step: usize) -> bool {
        self.enabled && (self.active_steps[0]..=self.active_steps[1]).contains(&step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClutterConfig {
    pub mean_rate: f64,
    pub detect_prob: f64,
    pub p_gate: f64,
}

impl Default for ClutterConfig {
    fn default() -> Self {
        Self {
            mean_rate: DEFAULT_CLUTTER_RATE,
            detect_prob: DEFAULT_PD,
            p_gate: DEFAULT_P_GATE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    pub dt: f64,
    pub sigma_a: f64,
    /// Initial position variance per axis (m²) around the first fix.
    pub init_pos_var: f64,
    /// Initial velocity variance per axis ((m/s)²).
    pub init_vel_var: f64,
    pub va_sigma: f64,
    /// Perturb the VA prior means by draws from their prior covariance.
    pub perturb_va_prior: bool,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            sigma_a: 0.5,
            init_pos_var: 1.0,
            init_vel_var: 0.5,
            va_sigma: DEFAULT_VA_SIGMA,
            perturb_va_prior: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimationConfig {
    pub num_mpc: usize,
    pub w_past: usize,
    pub w_init: usize,
    pub sigma_init: f64,
}

impl Default for EstimationConfig {
    fn default() -> Self {
        Self {
            num_mpc: DEFAULT_NUM_MPC,
            w_past: DEFAULT_W_PAST,
            w_init: DEFAULT_W_INIT,
            sigma_init: DEFAULT_SIGMA_INIT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub runs: usize,
    pub base_seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            runs: 30,
            base_seed: 1,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub anchors: Vec<[f64; 2]>,
    pub va_max_order: usize,
    pub room: RoomConfig,
    pub trajectory: TrajectoryConfig,
    pub waveform: WaveformConfig,
    pub channel: ChannelSection,
    pub interferer: InterfererConfig,
    pub clutter: ClutterConfig,
    pub rl: RlParams,
    pub tracker: TrackerConfig,
    pub estimation: EstimationConfig,
    pub monte_carlo: MonteCarloConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Cognitive,
            anchors: vec![[0.5, 7.0], [5.2, 3.2]],
            va_max_order: 2,
            room: RoomConfig::default(),
            trajectory: TrajectoryConfig::default(),
            waveform: WaveformConfig::default(),
            channel: ChannelSection::default(),
            interferer: InterfererConfig::default(),
            clutter: ClutterConfig::default(),
            rl: RlParams::default(),
            tracker: TrackerConfig::default(),
            estimation: EstimationConfig::default(),
            monte_carlo: MonteCarloConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| MintError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MintError::Config(format!("reading {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn floor_plan(&self) -> Result<FloorPlan> {
        FloorPlan::from_segments(&self.room.walls)
    }

    pub fn anchor_points(&self) -> Vec<Point2> {
        self.anchors.iter().map(|&a| a.into()).collect()
    }

    pub fn waveform_at(&self, fc: f64) -> Result<WaveformParams> {
        WaveformParams::new(self.waveform.pulse_duration, fc)
    }

    pub fn action_space(&self) -> Result<ActionSpace> {
        let w = &self.waveform;
        ActionSpace::centered(w.initial_fc, w.fc_spacing, w.num_bins, w.pulse_duration)
    }

    pub fn channel_config(&self) -> ChannelConfig {
        ChannelConfig {
            sample_rate: self.channel.sample_rate,
            duration: self.channel.duration,
            amplitude_ref: self.channel.amplitude_ref,
            scenario_seed: self.channel.scenario_seed,
            frequency_flat: self.channel.frequency_flat,
        }
    }

    pub fn clutter_model(&self) -> Result<ClutterModel> {
        ClutterModel::uniform(self.clutter.mean_rate, self.channel.duration, self.clutter.detect_prob)
    }

    pub fn motion_model(&self) -> MotionModel {
        MotionModel {
            dt: self.tracker.dt,
            sigma_a: self.tracker.sigma_a,
        }
    }

    pub fn sinr_settings(&self) -> SinrSettings {
        SinrSettings {
            w_past: self.estimation.w_past,
            w_init: self.estimation.w_init,
            sigma_init: self.estimation.sigma_init,
        }
    }

    /// Agent positions, one per step.
    pub fn trajectory_points(&self) -> Result<Vec<Point2>> {
        let t = &self.trajectory;
        if !t.positions.is_empty() {
            return Ok(t.positions.iter().map(|&p| p.into()).collect());
        }
        resample_polyline(&t.waypoints.iter().map(|&p| p.into()).collect::<Vec<_>>(), t.steps)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(MintError::Config(m));
        if self.anchors.is_empty() {
            return bad("at least one anchor is required".into());
        }
        let plan = self.floor_plan()?;
        let (lo, hi) = plan.bounding_box();
        let inside = |p: Point2| p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
        if let Some(a) = self.anchor_points().into_iter().find(|&a| !inside(a)) {
            return bad(format!("anchor ({}, {}) outside the room", a.x, a.y));
        }
        let traj = self.trajectory_points()?;
        if traj.is_empty() {
            return bad("trajectory is empty".into());
        }
        if let Some(p) = traj.iter().find(|&&p| !inside(p)) {
            return bad(format!("trajectory point ({}, {}) outside the room", p.x, p.y));
        }
        let w = &self.waveform;
        if !(w.band_lo < w.band_hi) {
            return bad("waveform band must satisfy band_lo < band_hi".into());
        }
        let actions = self.action_space()?;
        for &f in &actions.fc_bins {
            self.waveform_at(f)?.check_band(w.band_lo, w.band_hi)?;
        }
        if self.channel.sample_rate < 4.0 / w.pulse_duration {
            return Err(MintError::Undersampled {
                sample_rate: self.channel.sample_rate,
                required: 4.0 / w.pulse_duration,
            });
        }
        if !(self.channel.duration > 0.0) || !(self.channel.amplitude_ref > 0.0) || !(self.channel.noise_psd >= 0.0) {
            return bad("channel duration/amplitude_ref must be > 0 and noise_psd >= 0".into());
        }
        self.interferer.profile().validate()?;
        if self.interferer.active_steps[0] > self.interferer.active_steps[1] {
            return bad("interferer active_steps must be ordered".into());
        }
        self.clutter_model()?;
        if !(0.0..=1.0).contains(&self.clutter.p_gate) {
            return bad("p_gate must lie in [0, 1]".into());
        }
        self.rl.validate(actions.len())?;
        let t = &self.tracker;
        if !(t.dt > 0.0) || !(t.sigma_a >= 0.0) || !(t.init_pos_var > 0.0) || !(t.init_vel_var > 0.0) || !(t.va_sigma >= 0.0)
        {
            return bad("tracker parameters must be positive".into());
        }
        let e = &self.estimation;
        if e.num_mpc == 0 || e.w_past < e.w_init.max(1) || !(e.sigma_init > 0.0) {
            return bad("estimation parameters: num_mpc >= 1, w_past >= w_init, sigma_init > 0".into());
        }
        if self.monte_carlo.runs == 0 {
            return bad("monte_carlo.runs must be >= 1".into());
        }
        Ok(())
    }
}

/// Replaces each interior corner of a polyline by a circular arc of radius
/// `radius` (clipped to half the shorter adjacent segment) sampled at
/// `segments + 1` points.
pub fn rounded_corners(points: &[[f64; 2]], radius: f64, segments: usize) -> Vec<[f64; 2]> {
    if points.len() < 3 || segments == 0 {
        return points.to_vec();
    }
    let p: Vec<Point2> = points.iter().map(|&q| q.into()).collect();
    let mut out = vec![points[0]];
    for i in 1..p.len() - 1 {
        let (a, b, c) = (p[i - 1], p[i], p[i + 1]);
        let (la, lc) = (a.distance(b), b.distance(c));
        if la == 0.0 || lc == 0.0 {
            out.push(points[i]);
            continue;
        }
        let u = (a - b) * (1.0 / la);
        let v = (c - b) * (1.0 / lc);
        let cos = u.dot(v).clamp(-1.0, 1.0);
        let half = cos.acos() / 2.0;
        if half.sin().abs() < 1e-9 || (std::f64::consts::FRAC_PI_2 - half).abs() < 1e-9 {
            out.push(points[i]);
            continue;
        }
        // tangent distance from the corner for the requested radius
        let t = (radius / half.tan()).min(la / 2.0).min(lc / 2.0);
        let start = b + u * t;
        let end = b + v * t;
        // quadratic Bézier through the corner stays tangent to both segments
        for k in 0..=segments {
            let s = k as f64 / segments as f64;
            let q = start * ((1.0 - s) * (1.0 - s)) + b * (2.0 * s * (1.0 - s)) + end * (s * s);
            out.push([q.x, q.y]);
        }
    }
    out.push(points[points.len() - 1]);
    out
}

/// `n` points equally spaced in arc length along the polyline (endpoints included).
pub fn resample_polyline(points: &[Point2], n: usize) -> Result<Vec<Point2>> {
    if points.is_empty() || n == 0 {
        return Err(MintError::Config("trajectory needs waypoints and steps >= 1".into()));
    }
    if points.len() == 1 || n == 1 {
        return Ok(vec![points[0]; n]);
    }
    let seg: Vec<f64> = points.windows(2).map(|w| w[0].distance(w[1])).collect();
    let total: f64 = seg.iter().sum();
    if !(total > 0.0) {
        return Ok(vec![points[0]; n]);
    }
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    let mut start = 0.0;
    for k in 0..n {
        let s = total * k as f64 / (n - 1) as f64;
        while i + 1 < seg.len() && s > start + seg[i] {
            start += seg[i];
            i += 1;
        }
        let t = if seg[i] > 0.0 { ((s - start) / seg[i]).clamp(0.0, 1.0) } else { 0.0 };
        out.push(points[i] + (points[i + 1] - points[i]) * t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_roundtrip() {
        let cfg = ScenarioConfig::default();
        cfg.validate().unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(ScenarioConfig::from_toml_str(&text).unwrap(), cfg);
        assert_eq!(ScenarioConfig::from_toml_str("").unwrap(), cfg);
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let cfg = ScenarioConfig::from_toml_str("mode = \"fixed\"\n[rl]\nepsilon = 0.2\n").unwrap();
        assert_eq!(cfg.mode, Mode::Fixed);
        assert_eq!(cfg.rl.epsilon, 0.2);
        assert_eq!(cfg.rl.discount_gamma, 0.8);
        assert_eq!(cfg.waveform.num_bins, 40);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ScenarioConfig::from_toml_str("anchors = [[50.0, 1.0]]").is_err());
        assert!(ScenarioConfig::from_toml_str("[trajectory]\npositions = [[-1.0, 1.0]]").is_err());
        assert!(ScenarioConfig::from_toml_str("bogus = 1").is_err());
        assert!(ScenarioConfig::from_toml_str("[rl]\nplan_subset_size = 41").is_err());
        assert!(ScenarioConfig::from_toml_str("[channel]\nsample_rate = 1e9").is_err());
    }

    #[test]
    fn default_action_grid() {
        let a = ScenarioConfig::default().action_space().unwrap();
        assert_eq!(a.len(), 40);
        assert_eq!(a.nearest_bin(7e9), 20);
        assert!((a.fc_bins[1] - a.fc_bins[0] - 50e6).abs() < 1e-3);
    }

    #[test]
    fn resampling_is_uniform_in_arc_length() {
        let pts = [Point2::new(0.0, 0.0), Point2::new(3.0, 0.0), Point2::new(3.0, 1.0)];
        let r = resample_polyline(&pts, 5).unwrap();
        assert_eq!(r.len(), 5);
        assert_eq!(r[0], pts[0]);
        assert!((r[4] - pts[2]).norm() < 1e-12);
        for w in r.windows(2) {
            // corner cutting shortens one chord; all others are exactly one quarter of the length
            assert!(w[0].distance(w[1]) <= 1.0 + 1e-12);
        }
        assert!((r[2] - Point2::new(2.0, 0.0)).norm() < 1e-12);
    }
}
