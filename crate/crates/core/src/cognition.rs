//! Cognitive controller over a discrete carrier-frequency grid.
//!
//! Value-to-go learning from the measured entropy reward, model-based
//! planning through covariance rollouts, Boltzmann policy updates and
//! ε-greedy action selection.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MintError, Result};
use crate::geometry::VaKey;
use crate::tracker::{posterior_entropy, predict_covariance_rollout, MotionModel, StackedState, UtParams};
use crate::uncertainty::{gaussian_entropy, SinrMemory};

pub const PMF_FLOOR: f64 = 1e-12;
pub const REWARD_MIN_DELTA: f64 = 1e-12;
pub const REWARD_MAX_DELTA: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    pub fc_bins: Vec<f64>,
    pub tp: f64,
}

impl ActionSpace {
    /// `count` bins spaced `spacing` apart with `center` at index `count / 2`.
    pub fn centered(center: f64, spacing: f64, count: usize, tp: f64) -> Result<Self> {
        if count == 0 {
            return Err(MintError::Config("action space must not be empty".into()));
        }
        if !(spacing > 0.0) || !(tp > 0.0) {
            return Err(MintError::NonPositive("carrier spacing / pulse duration"));
        }
        let half = (count / 2) as f64;
        let fc_bins = (0..count).map(|i| center + (i as f64 - half) * spacing).collect();
        Ok(Self { fc_bins, tp })
    }

    pub fn len(&self) -> usize {
        self.fc_bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fc_bins.is_empty()
    }

    pub fn frequency(&self, bin: usize) -> f64 {
        self.fc_bins[bin]
    }

    /// Bin whose carrier is nearest to `fc` (ties: lower bin).
    pub fn nearest_bin(&self, fc: f64) -> usize {
        let mut best = 0;
        for (i, f) in self.fc_bins.iter().enumerate() {
            if (f - fc).abs() < (self.fc_bins[best] - fc).abs() {
                best = i;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub j: Vec<f64>,
}

impl ValueTable {
    pub fn zeros(n: usize) -> Self {
        Self { j: vec![0.0; n] }
    }

    /// Greedy action, ties to the lowest bin.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.j.iter().enumerate() {
            if v > self.j[best] {
                best = i;
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyPmf {
    pub pi: Vec<f64>,
}

impl PolicyPmf {
    pub fn uniform(n: usize) -> Self {
        Self {
            pi: vec![1.0 / n as f64; n],
        }
    }

    pub fn expectation(&self, j: &ValueTable) -> f64 {
        self.pi.iter().zip(&j.j).map(|(p, v)| p * v).sum()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, p) in self.pi.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.pi.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RewardMode {
    /// `sign(Δh)·|ln|Δh||`
    #[default]
    Log,
    /// `Δh`
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RlParams {
    pub learn_rate_alpha: f64,
    pub discount_gamma: f64,
    pub epsilon: f64,
    pub temperature_tau: f64,
    pub horizon_l_future: usize,
    pub plan_subset_size: usize,
    pub reward: RewardMode,
}

impl Default for RlParams {
    fn default() -> Self {
        Self {
            learn_rate_alpha: 0.3,
            discount_gamma: 0.8,
            epsilon: 0.1,
            temperature_tau: 1.0,
            horizon_l_future: 2,
            plan_subset_size: 20,
            reward: RewardMode::Log,
        }
    }
}

impl RlParams {
    pub fn validate(&self, num_actions: usize) -> Result<()> {
        let ok = self.learn_rate_alpha > 0.0
            && self.learn_rate_alpha <= 1.0
            && self.discount_gamma > 0.0
            && self.discount_gamma <= 1.0
            && (0.0..=1.0).contains(&self.epsilon)
            && self.temperature_tau > 0.0
            && self.horizon_l_future >= 1
            && self.plan_subset_size <= num_actions;
        if ok {
            Ok(())
        } else {
            Err(MintError::Config(format!("invalid RL parameters {self:?}")))
        }
    }
}

/// Reward for the entropy change `h_prev − h_curr`.
pub fn immediate_reward(h_prev: f64, h_curr: f64) -> f64 {
    reward_with_mode(h_prev, h_curr, RewardMode::Log)
}

pub fn reward_with_mode(h_prev: f64, h_curr: f64, mode: RewardMode) -> f64 {
    let dh = h_prev - h_curr;
    match mode {
        RewardMode::Linear => dh,
        RewardMode::Log => {
            if dh == 0.0 || dh.is_nan() {
                return 0.0;
            }
            let mag = dh.abs().clamp(REWARD_MIN_DELTA, REWARD_MAX_DELTA);
            dh.signum() * mag.ln().abs()
        }
    }
}

/// `J(c) ← J(c) + α[R(c) + γ Σ π(c')J(c') − J(c)]`.
pub fn update_value(j: &mut ValueTable, c: usize, expected_reward: f64, pi: &PolicyPmf, params: &RlParams) {
    let target = expected_reward + params.discount_gamma * pi.expectation(j);
    j.j[c] += params.learn_rate_alpha * (target - j.j[c]);
}

pub fn learn(j: &mut ValueTable, c_applied: usize, r_measured: f64, pi: &PolicyPmf, params: &RlParams) {
    update_value(j, c_applied, r_measured, pi, params);
}

/// Read-only view of the perceptor used for planning.
pub struct PlanningContext<'a> {
    pub snapshot: &'a StackedState,
    /// State slots expected to be observed, with their memory keys.
    pub slots: &'a [(usize, VaKey)],
    pub memory: &'a SinrMemory,
    pub beta: f64,
    pub motion: MotionModel,
    pub ut: UtParams,
}

/// Discounted sum of predicted rewards along a rollout for action `c`.
pub fn predicted_reward(ctx: &PlanningContext<'_>, c: usize, params: &RlParams) -> Result<f64> {
    let vars: Vec<(usize, f64)> = ctx
        .slots
        .iter()
        .map(|&(slot, key)| (slot, ctx.memory.range_var(key, c, ctx.beta)))
        .collect();
    let covs = predict_covariance_rollout(ctx.snapshot, &ctx.motion, &vars, params.horizon_l_future, &ctx.ut)?;
    let mut h_prev = posterior_entropy(ctx.snapshot, true)?;
    let mut total = 0.0;
    let mut discount = 1.0;
    for cov in covs {
        let h = gaussian_entropy(&cov.view((0, 0), (4, 4)).into_owned())?;
        discount *= params.discount_gamma;
        total += discount * reward_with_mode(h_prev, h, params.reward);
        h_prev = h;
    }
    Ok(total)
}

/// Sample `k` distinct actions from `pi` without replacement.
pub fn sample_subset<R: Rng + ?Sized>(pi: &PolicyPmf, k: usize, rng: &mut R) -> Vec<usize> {
    let mut weights = pi.pi.clone();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k.min(weights.len()) {
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, w) in weights.iter().enumerate() {
                acc += w;
                if *w > 0.0 && u < acc {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.or_else(|| weights.iter().rposition(|&w| w > 0.0))
        } else {
            None
        };
        let i = match pick {
            Some(i) => i,
            None => match (0..weights.len()).find(|i| !out.contains(i)) {
                Some(i) => i,
                None => break,
            },
        };
        out.push(i);
        weights[i] = 0.0;
    }
    out
}

/// Planning step: updates `J` for a subset of actions sampled from `pi`.
/// Returns the planned actions.
pub fn plan<R: Rng + ?Sized>(
    j: &mut ValueTable,
    pi: &PolicyPmf,
    ctx: &PlanningContext<'_>,
    params: &RlParams,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if params.plan_subset_size == 0 {
        return Ok(Vec::new());
    }
    let mut subset = sample_subset(pi, params.plan_subset_size, rng);
    subset.sort_unstable();
    let rewards = subset
        .iter()
        .map(|&c| predicted_reward(ctx, c, params))
        .collect::<Result<Vec<f64>>>()?;
    // all updates see the same pre-planning table
    let before = j.clone();
    for (&c, r) in subset.iter().zip(rewards) {
        let target = r + params.discount_gamma * pi.expectation(&before);
        j.j[c] = before.j[c] + params.learn_rate_alpha * (target - before.j[c]);
    }
    Ok(subset)
}

/// `π ∝ π_prev · exp(ΔJ/τ)`, floored at 1e-12 before renormalization.
pub fn update_policy_boltzmann(pi: &PolicyPmf, delta_j: &[f64], temperature: f64) -> PolicyPmf {
    let shift = delta_j.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let shift = if shift.is_finite() { shift } else { 0.0 };
    let mut out: Vec<f64> = pi
        .pi
        .iter()
        .zip(delta_j)
        .map(|(&p, &d)| (p * ((d - shift) / temperature).exp()).max(PMF_FLOOR))
        .collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
    PolicyPmf { pi: out }
}

/// ε-greedy: with probability ε sample from `pi`, else argmax of `J`.
pub fn select_action<R: Rng + ?Sized>(pi: &PolicyPmf, j: &ValueTable, params: &RlParams, rng: &mut R) -> usize {
    let xi: f64 = rng.random();
    if xi < params.epsilon {
        pi.sample(rng)
    } else {
        j.argmax()
    }
}

/// Controller state owned by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Controller {
    pub actions: ActionSpace,
    pub params: RlParams,
    pub j: ValueTable,
    pub pi: PolicyPmf,
    pub current: usize,
}

impl Controller {
    pub fn new(actions: ActionSpace, params: RlParams, initial_fc: f64) -> Result<Self> {
        params.validate(actions.len())?;
        let n = actions.len();
        let current = actions.nearest_bin(initial_fc);
        Ok(Self {
            actions,
            params,
            j: ValueTable::zeros(n),
            pi: PolicyPmf::uniform(n),
            current,
        })
    }

    pub fn carrier(&self) -> f64 {
        self.actions.frequency(self.current)
    }

    /// Learn from the measured reward, plan, update the policy and choose the
    /// next action.
    pub fn step<R: Rng + ?Sized>(&mut self, reward: f64, ctx: &PlanningContext<'_>, rng: &mut R) -> Result<usize> {
        let before = self.j.clone();
        learn(&mut self.j, self.current, reward, &self.pi, &self.params);
        plan(&mut self.j, &self.pi, ctx, &self.params, rng)?;
        let delta: Vec<f64> = self.j.j.iter().zip(&before.j).map(|(a, b)| a - b).collect();
        self.pi = update_policy_boltzmann(&self.pi, &delta, self.params.temperature_tau);
        self.current = select_action(&self.pi, &self.j, &self.params, rng);
        Ok(self.current)
    }
}
