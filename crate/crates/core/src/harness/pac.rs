//! One perception–action run over the trajectory.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{Mode, ScenarioConfig};
use crate::association::associate;
use crate::chest::matching_pursuit;
use crate::cognition::{reward_with_mode, Controller, PlanningContext};
use crate::error::Result;
use crate::geometry::{build_virtual_anchors_with_prior, expected_delay, Point2, VaKey, VirtualAnchor};
use crate::signal::{complex_normal, derive_seed, make_pulse, synthesize_received, Pulse};
use crate::tracker::{posterior_entropy, predict, update, AgentState, RangeObservation, StackedState, UtParams};
use crate::uncertainty::SinrMemory;

const STREAM_PRIOR: u64 = 1;
const STREAM_SIGNAL: u64 = 2;
const STREAM_CONTROL: u64 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub truth: Point2,
    pub estimate: Point2,
    pub error_m: f64,
    pub entropy_nats: f64,
    pub fc_hz: f64,
    pub n_assoc: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run_id: usize,
    pub seed: u64,
    pub mode: Mode,
    pub steps: Vec<StepRecord>,
    /// Controller's greedy bin after each step (cognitive mode only; not
    /// part of runs.csv).
    #[serde(default)]
    pub greedy_bins: Vec<usize>,
}

/// Scenario pieces shared by every run of one config.
pub struct Scenario {
    pub cfg: ScenarioConfig,
    pub trajectory: Vec<Point2>,
    /// Ground-truth VAs per anchor.
    pub vas: Vec<Vec<VirtualAnchor>>,
    pub pulse: Pulse,
}

impl Scenario {
    pub fn new(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let plan = cfg.floor_plan()?;
        let vas = cfg
            .anchor_points()
            .into_iter()
            .enumerate()
            .map(|(i, a)| build_virtual_anchors_with_prior(&plan, a, i, cfg.va_max_order, cfg.tracker.va_sigma))
            .collect::<Result<Vec<_>>>()?;
        let pulse = make_pulse(&cfg.waveform_at(cfg.waveform.initial_fc)?, cfg.channel.sample_rate)?;
        Ok(Self {
            cfg: cfg.clone(),
            trajectory: cfg.trajectory_points()?,
            vas,
            pulse,
        })
    }

    fn all_vas(&self) -> impl Iterator<Item = &VirtualAnchor> {
        self.vas.iter().flatten()
    }
}

/// Position fix from the first scan: grid search over the room for the point
/// whose VA ranges best explain the estimated ranges (each VA contributes
/// its squared residual to the nearest estimate, capped at 0.3 m), refined
/// on a 1 cm grid.
pub fn initial_fix(sc: &Scenario, ranges: &[Vec<f64>]) -> Result<Point2> {
    let (lo, hi) = sc.cfg.floor_plan()?.bounding_box();
    let cost = |p: Point2| -> f64 {
        sc.vas
            .iter()
            .zip(ranges)
            .map(|(vas, ys)| {
                vas.iter()
                    .map(|va| {
                        let d = p.distance(va.mean);
                        ys.iter().map(|y| (y - d).powi(2)).fold(0.09, f64::min)
                    })
                    .sum::<f64>()
            })
            .sum()
    };
    let search = |x0: f64, x1: f64, y0: f64, y1: f64, step: f64| -> Point2 {
        let nx = ((x1 - x0) / step).ceil() as usize;
        let ny = ((y1 - y0) / step).ceil() as usize;
        let mut best = (f64::INFINITY, Point2::new(x0, y0));
        for i in 0..=nx {
            for j in 0..=ny {
                let p = Point2::new((x0 + i as f64 * step).min(x1), (y0 + j as f64 * step).min(y1));
                let c = cost(p);
                if c < best.0 {
                    best = (c, p);
                }
            }
        }
        best.1
    };
    let coarse = search(lo.x, hi.x, lo.y, hi.y, 0.05);
    Ok(search(
        (coarse.x - 0.05).max(lo.x),
        (coarse.x + 0.05).min(hi.x),
        (coarse.y - 0.05).max(lo.y),
        (coarse.y + 0.05).min(hi.y),
        0.01,
    ))
}

/// Initial filter state: agent at the first fix with zero velocity, VA priors
/// (optionally with means drawn from their own covariance).
fn initial_state(sc: &Scenario, seed: u64, fix: Point2) -> Result<StackedState> {
    let cfg = &sc.cfg;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[STREAM_PRIOR]));
    let agent = AgentState {
        p: fix,
        v: Point2::new(0.0, 0.0),
    };
    let (pv, vv) = (cfg.tracker.init_pos_var, cfg.tracker.init_vel_var);
    let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![pv, pv, vv, vv]));
    let mut prior: Vec<VirtualAnchor> = sc.all_vas().cloned().collect();
    if cfg.tracker.perturb_va_prior {
        for va in prior.iter_mut().filter(|v| !v.is_physical()) {
            let s = cfg.tracker.va_sigma;
            let d = complex_normal(&mut rng, 2.0 * s * s);
            va.mean = Point2::new(va.mean.x + d.re, va.mean.y + d.im);
        }
    }
    StackedState::new(agent, cov, &prior)
}

/// Filter view of one VA for association: state mean and the covariance of
/// the agent position relative to it.
fn va_view(s: &StackedState, slot: usize, truth: &VirtualAnchor) -> VirtualAnchor {
    VirtualAnchor {
        mean: s.va_position(slot),
        cov: s.relative_cov(slot),
        ..truth.clone()
    }
}

pub fn run_pac_loop(sc: &Scenario, run_id: usize, seed: u64) -> Result<RunResult> {
    let cfg = &sc.cfg;
    let ch = cfg.channel_config();
    let actions = cfg.action_space()?;
    let mut controller = Controller::new(actions.clone(), cfg.rl, cfg.waveform.initial_fc)?;
    let mut control_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[STREAM_CONTROL]));
    let mut memory = SinrMemory::new(cfg.sinr_settings(), actions.fc_bins.clone());
    let clutter = cfg.clutter_model()?;
    let motion = cfg.motion_model();
    let ut = UtParams::default();
    let beta = sc.pulse.beta;
    let dm = cfg.interferer.profile();

    let mut state = StackedState::new(
        AgentState {
            p: sc.trajectory[0],
            v: Point2::new(0.0, 0.0),
        },
        DMatrix::identity(4, 4),
        &[],
    )?;
    let mut h_prev = f64::NAN;
    let mut attention: Vec<(usize, VaKey)> = Vec::new();
    let mut steps = Vec::with_capacity(sc.trajectory.len());
    let mut greedy_bins = Vec::new();

    let mut slot_base = Vec::with_capacity(sc.vas.len());
    let mut acc = 0;
    for v in &sc.vas {
        slot_base.push(acc);
        acc += v.len();
    }

    for (n, &truth) in sc.trajectory.iter().enumerate() {
        let bin = controller.current;
        let fc = actions.frequency(bin);
        let w = cfg.waveform_at(fc)?;

        // (1)-(2) synthesize and estimate per anchor
        let mut ranges: Vec<Vec<f64>> = Vec::with_capacity(sc.vas.len());
        let mut amps = Vec::with_capacity(sc.vas.len());
        for (a, vas) in sc.vas.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[STREAM_SIGNAL, n as u64, a as u64]));
            let prof = cfg.interferer.is_active(n).then(|| dm.with_onset(expected_delay(truth, &vas[0])));
            let r = synthesize_received(&ch, &sc.pulse, truth, vas, &w, prof.as_ref(), cfg.channel.noise_psd, &mut rng)?;
            let est = matching_pursuit(&r, &sc.pulse, cfg.estimation.num_mpc)?;
            ranges.push(est.iter().map(|e| e.range_hat).collect());
            amps.push(est.iter().map(|e| e.amplitude_hat).collect::<Vec<_>>());
        }

        // (3) predict; the first scan initializes the state instead
        if n == 0 {
            state = initial_state(sc, seed, initial_fix(sc, &ranges)?)?;
            h_prev = posterior_entropy(&state, true)?;
        } else {
            state = predict(&state, &motion);
        }

        // (4) per-anchor association against the predicted state
        let pred_p = state.agent().p;
        let mut obs = Vec::new();
        let mut assoc_keys = Vec::new();
        for (a, vas) in sc.vas.iter().enumerate() {
            let views: Vec<VirtualAnchor> = (0..vas.len()).map(|i| va_view(&state, slot_base[a] + i, &vas[i])).collect();
            let sigma2s: Vec<f64> = vas.iter().map(|v| memory.tracking_range_var(v.key(), n, beta)).collect();
            let res = associate(pred_p, &views, &ranges[a], &sigma2s, &clutter, cfg.clutter.p_gate)?;
            for (&k, &m) in res.partition.associated_vas.iter().zip(&res.partition.associated_measurements) {
                obs.push(RangeObservation {
                    slot: slot_base[a] + k,
                    range: ranges[a][m],
                    variance: sigma2s[k],
                });
                assoc_keys.push((slot_base[a] + k, vas[k].key(), amps[a][m]));
            }
        }

        // (5) update
        state = update(&state, &obs, &ut)?;

        // (6) SINR memory at the applied bin and per-VA recent window
        for &(_, key, amp) in &assoc_keys {
            memory.record(key, bin, n, amp);
        }

        // (7) feedback
        let h = posterior_entropy(&state, true)?;
        let reward = reward_with_mode(h_prev, h, cfg.rl.reward);
        h_prev = h;
        let est = state.agent().p;
        steps.push(StepRecord {
            step: n,
            truth,
            estimate: est,
            error_m: est.distance(truth),
            entropy_nats: h,
            fc_hz: fc,
            n_assoc: obs.len(),
            reward,
        });

        // (8) control
        if cfg.mode == Mode::Cognitive {
            if !assoc_keys.is_empty() {
                attention = assoc_keys.iter().map(|&(slot, key, _)| (slot, key)).collect();
            }
            let slots: Vec<usize> = attention.iter().map(|&(s, _)| s).collect();
            let snapshot = state.marginal(&slots);
            let local: Vec<(usize, VaKey)> = attention.iter().enumerate().map(|(i, &(_, k))| (i, k)).collect();
            let ctx = PlanningContext {
                snapshot: &snapshot,
                slots: &local,
                memory: &memory,
                beta,
                motion,
                ut,
            };
            controller.step(reward, &ctx, &mut control_rng)?;
            greedy_bins.push(controller.j.argmax());
        }
    }

    Ok(RunResult {
        run_id,
        seed,
        mode: cfg.mode,
        steps,
        greedy_bins,
    })
}

