//! Probabilistic data association between expected VA ranges and measured
//! ranges under missed detections and clutter.
//!
//! The posterior over feasible association vectors factorizes into one
//! weight per VA (`ψ(k, 0)` for a miss, `ψ(k, m)` for measurement `m`)
//! times a one-to-one constraint. Marginals are computed by sum-product
//! message passing along the chain of VAs, where the chain state is the set
//! of measurements already claimed; this is exact. For very large scans a
//! damped loopy bipartite BP is used instead.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{MintError, Result};
use crate::geometry::{Point2, VirtualAnchor, SPEED_OF_LIGHT};

pub const DEFAULT_PD: f64 = 0.95;
pub const DEFAULT_CLUTTER_RATE: f64 = 2.0;
pub const DEFAULT_P_GATE: f64 = 0.5;

/// Largest measurement count handled by the exact subset recursion.
pub const EXACT_MAX_MEASUREMENTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClutterModel {
    pub mean_rate_mu: f64,
    /// Uniform false-alarm density over the observable range interval (1/m).
    pub f_fa_density: f64,
    pub detect_prob_pd: f64,
}

impl ClutterModel {
    /// Uniform clutter over `[0, c·T]`.
    pub fn uniform(mean_rate_mu: f64, duration: f64, detect_prob_pd: f64) -> Result<Self> {
        let m = Self {
            mean_rate_mu,
            f_fa_density: 1.0 / (SPEED_OF_LIGHT * duration),
            detect_prob_pd,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_rate_mu >= 0.0) {
            return Err(MintError::Config("clutter rate must be >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.detect_prob_pd) {
            return Err(MintError::Config("detection probability must lie in [0, 1]".into()));
        }
        if !(self.f_fa_density > 0.0) {
            return Err(MintError::Config("false-alarm density must be > 0".into()));
        }
        Ok(())
    }
}

/// Per-VA association: 0 = no measurement, `m ≥ 1` = measurement `m − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssociationVector(pub Vec<usize>);

impl AssociationVector {
    pub fn is_feasible(&self) -> bool {
        let mut used: Vec<usize> = self.0.iter().copied().filter(|&m| m > 0).collect();
        let n = used.len();
        used.sort_unstable();
        used.dedup();
        used.len() == n
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Partition {
    /// Indices (into the VA list) of VAs with a measurement.
    pub associated_vas: Vec<usize>,
    /// Measurement indices claimed by those VAs, in VA order.
    pub associated_measurements: Vec<usize>,
    /// Unclaimed measurement indices, ascending.
    pub remaining_measurements: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationResult {
    pub marginals: DMatrix<f64>,
    pub map_assignment: AssociationVector,
    pub partition: Partition,
}

/// `N(y; ‖p − a‖, σ² + uᵀ C_a u)`.
pub fn local_likelihood(y: f64, p: Point2, va: &VirtualAnchor, sigma2: f64) -> f64 {
    let d = p.distance(va.mean);
    let proj = if d > 0.0 {
        let u = (va.mean - p) * (1.0 / d);
        let uv = u.to_vector();
        (uv.transpose() * va.cov * uv)[(0, 0)]
    } else {
        0.5 * va.cov.trace()
    };
    let var = sigma2 + proj.max(0.0);
    let r = y - d;
    (-0.5 * r * r / var).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// `ψ(k, m) = P_d f(y_m | p; a_k) / f_FA` and `ψ(k, 0) = 1 − P_d`.
pub fn association_weights(
    pred_p: Point2,
    vas: &[VirtualAnchor],
    measurements: &[f64],
    sigma2s: &[f64],
    clutter: &ClutterModel,
) -> Result<DMatrix<f64>> {
    if sigma2s.len() != vas.len() {
        return Err(MintError::Dimension("one range variance per VA required".into()));
    }
    let (k, m) = (vas.len(), measurements.len());
    let mut w = DMatrix::zeros(k, m + 1);
    for (i, va) in vas.iter().enumerate() {
        w[(i, 0)] = 1.0 - clutter.detect_prob_pd;
        for (j, &y) in measurements.iter().enumerate() {
            w[(i, j + 1)] =
                clutter.detect_prob_pd * local_likelihood(y, pred_p, va, sigma2s[i]) / clutter.f_fa_density;
        }
    }
    Ok(w)
}

/// Marginals `p(b_k = m | y)` under the one-to-one constraint.
pub fn association_marginals(weights: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if weights.ncols() - 1 <= EXACT_MAX_MEASUREMENTS {
        Ok(chain_marginals(weights))
    } else {
        loopy_bp_marginals(weights, &LoopyBpParams::default())
    }
}

fn normalize_max(v: &mut [f64]) {
    let mx = v.iter().copied().fold(0.0, f64::max);
    if mx > 0.0 && mx.is_finite() {
        v.iter_mut().for_each(|x| *x /= mx);
    }
}

fn normalize_rows(mut p: DMatrix<f64>) -> DMatrix<f64> {
    for mut row in p.row_iter_mut() {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row /= s;
        } else {
            row.fill(0.0);
            row[0] = 1.0;
        }
    }
    p
}

/// Forward/backward sum-product over VAs with the claimed-measurement set as state.
fn chain_marginals(w: &DMatrix<f64>) -> DMatrix<f64> {
    let (k, m) = (w.nrows(), w.ncols() - 1);
    let states = 1usize << m;

    // fwd[i][S]: VAs 0..i placed, using exactly S
    let mut fwd = vec![vec![0.0; states]; k + 1];
    fwd[0][0] = 1.0;
    for i in 0..k {
        let (prev, next) = fwd.split_at_mut(i + 1);
        let (prev, next) = (&prev[i], &mut next[0]);
        for s in 0..states {
            let a = prev[s];
            if a == 0.0 {
                continue;
            }
            next[s] += a * w[(i, 0)];
            for j in 0..m {
                if s & (1 << j) == 0 {
                    next[s | (1 << j)] += a * w[(i, j + 1)];
                }
            }
        }
        normalize_max(next);
    }

    // bwd[i][S]: completions of VAs i..k given S already used
    let mut bwd = vec![vec![0.0; states]; k + 1];
    bwd[k].fill(1.0);
    for i in (0..k).rev() {
        let (head, tail) = bwd.split_at_mut(i + 1);
        let (cur, next) = (&mut head[i], &tail[0]);
        for s in 0..states {
            let mut acc = w[(i, 0)] * next[s];
            for j in 0..m {
                if s & (1 << j) == 0 {
                    acc += w[(i, j + 1)] * next[s | (1 << j)];
                }
            }
            cur[s] = acc;
        }
        normalize_max(cur);
    }

    let mut p = DMatrix::zeros(k, m + 1);
    for i in 0..k {
        for s in 0..states {
            let a = fwd[i][s];
            if a == 0.0 {
                continue;
            }
            p[(i, 0)] += a * w[(i, 0)] * bwd[i + 1][s];
            for j in 0..m {
                if s & (1 << j) == 0 {
                    p[(i, j + 1)] += a * w[(i, j + 1)] * bwd[i + 1][s | (1 << j)];
                }
            }
        }
    }
    normalize_rows(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopyBpParams {
    pub damping: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for LoopyBpParams {
    fn default() -> Self {
        Self {
            damping: 0.5,
            max_iterations: 200,
            tolerance: 1e-9,
        }
    }
}

/// Damped loopy BP on the VA/measurement bipartite graph. Approximate
/// whenever the graph has cycles (K, M ≥ 2).
pub fn loopy_bp_marginals(w: &DMatrix<f64>, params: &LoopyBpParams) -> Result<DMatrix<f64>> {
    let (k, m) = (w.nrows(), w.ncols() - 1);
    // nu[(i, j)]: measurement j -> VA i
    let mut nu = DMatrix::from_element(k, m, 1.0);
    let mut mu = DMatrix::zeros(k, m);
    let marginals = |nu: &DMatrix<f64>| {
        let mut p = DMatrix::zeros(k, m + 1);
        for i in 0..k {
            p[(i, 0)] = w[(i, 0)];
            for j in 0..m {
                p[(i, j + 1)] = w[(i, j + 1)] * nu[(i, j)];
            }
        }
        normalize_rows(p)
    };

    let mut last_change = f64::INFINITY;
    for _ in 0..params.max_iterations {
        for i in 0..k {
            let total: f64 = w[(i, 0)] + (0..m).map(|j| w[(i, j + 1)] * nu[(i, j)]).sum::<f64>();
            for j in 0..m {
                let den = total - w[(i, j + 1)] * nu[(i, j)];
                mu[(i, j)] = if den > 0.0 { w[(i, j + 1)] / den } else { 0.0 };
            }
        }
        last_change = 0.0;
        for j in 0..m {
            let total: f64 = (0..k).map(|i| mu[(i, j)]).sum();
            for i in 0..k {
                let fresh = 1.0 / (1.0 + total - mu[(i, j)]);
                let damped = params.damping * nu[(i, j)] + (1.0 - params.damping) * fresh;
                last_change = last_change.max((damped - nu[(i, j)]).abs());
                nu[(i, j)] = damped;
            }
        }
        if last_change < params.tolerance {
            return Ok(marginals(&nu));
        }
    }
    let last = marginals(&nu);
    Err(MintError::NoConvergence {
        iterations: params.max_iterations,
        last_change,
        last_marginals: last.row_iter().map(|r| r.iter().copied().collect()).collect(),
    })
}

/// Per-VA argmax with one-to-one repair and a probability gate.
///
/// Conflicts go to the larger marginal (ties: lower VA index); the loser
/// falls back to its next-best column. A measurement is kept only if its
/// marginal is at least `p_gate`.
pub fn map_association(marginals: &DMatrix<f64>, p_gate: f64) -> AssociationVector {
    let (k, cols) = (marginals.nrows(), marginals.ncols());
    let prefs: Vec<Vec<usize>> = (0..k)
        .map(|i| {
            let mut c: Vec<usize> = (0..cols).collect();
            c.sort_by(|&a, &b| marginals[(i, b)].total_cmp(&marginals[(i, a)]).then(a.cmp(&b)));
            c
        })
        .collect();
    let mut next_pref = vec![0usize; k];
    let mut choice = vec![0usize; k];
    let mut owner: Vec<Option<usize>> = vec![None; cols];
    let mut pending: Vec<usize> = (0..k).rev().collect();

    while let Some(i) = pending.pop() {
        let Some(&col) = prefs[i].get(next_pref[i]) else {
            choice[i] = 0;
            continue;
        };
        next_pref[i] += 1;
        if col == 0 {
            choice[i] = 0;
            continue;
        }
        match owner[col] {
            None => {
                owner[col] = Some(i);
                choice[i] = col;
            }
            Some(o) => {
                let (mi, mo) = (marginals[(i, col)], marginals[(o, col)]);
                if mi > mo || (mi == mo && i < o) {
                    owner[col] = Some(i);
                    choice[i] = col;
                    choice[o] = 0;
                    pending.push(o);
                } else {
                    pending.push(i);
                }
            }
        }
    }
    for (i, c) in choice.iter_mut().enumerate() {
        if *c > 0 && marginals[(i, *c)] < p_gate {
            *c = 0;
        }
    }
    AssociationVector(choice)
}

pub fn partition_sets(assignment: &AssociationVector, num_measurements: usize) -> Partition {
    let mut part = Partition::default();
    let mut claimed = vec![false; num_measurements];
    for (i, &b) in assignment.0.iter().enumerate() {
        if b > 0 && b <= num_measurements {
            part.associated_vas.push(i);
            part.associated_measurements.push(b - 1);
            claimed[b - 1] = true;
        }
    }
    part.remaining_measurements = (0..num_measurements).filter(|&j| !claimed[j]).collect();
    part
}

/// Weights, marginals, MAP and partition for one anchor.
pub fn associate(
    pred_p: Point2,
    vas: &[VirtualAnchor],
    measurements: &[f64],
    sigma2s: &[f64],
    clutter: &ClutterModel,
    p_gate: f64,
) -> Result<AssociationResult> {
    let weights = association_weights(pred_p, vas, measurements, sigma2s, clutter)?;
    let marginals = association_marginals(&weights)?;
    let map_assignment = map_association(&marginals, p_gate);
    let partition = partition_sets(&map_assignment, measurements.len());
    Ok(AssociationResult {
        marginals,
        map_assignment,
        partition,
    })
}
