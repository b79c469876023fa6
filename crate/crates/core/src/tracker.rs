//! Unscented Kalman filter over the stacked agent + VA state.
//!
//! State layout: `[p_x, p_y, v_x, v_y, a_1x, a_1y, …]`. The agent follows a
//! constant-velocity model; VAs are static. Measurements are ranges
//! `‖p − a_k‖` for the VAs associated in the current scan, updating agent and
//! VA blocks jointly through their cross-covariances.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{MintError, Result};
use crate::geometry::{Point2, VaKey, VirtualAnchor};
use crate::uncertainty::gaussian_entropy;

pub const AGENT_DIM: usize = 4;
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Scaled unscented transform parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: f64,
}

impl Default for UtParams {
    fn default() -> Self {
        Self {
            alpha: 1e-1,
            beta: 2.0,
            kappa: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionModel {
    pub dt: f64,
    pub sigma_a: f64,
}

impl Default for MotionModel {
    fn default() -> Self {
        Self { dt: 0.1, sigma_a: 0.5 }
    }
}

impl MotionModel {
    pub fn transition(&self) -> DMatrix<f64> {
        let mut f = DMatrix::identity(AGENT_DIM, AGENT_DIM);
        f[(0, 2)] = self.dt;
        f[(1, 3)] = self.dt;
        f
    }

    /// `σ_a² G Gᵀ`.
    pub fn process_noise(&self) -> DMatrix<f64> {
        let h = self.dt * self.dt / 2.0;
        let g = DMatrix::from_row_slice(4, 2, &[h, 0.0, 0.0, h, self.dt, 0.0, 0.0, self.dt]);
        &g * g.transpose() * (self.sigma_a * self.sigma_a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub p: Point2,
    pub v: Point2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StackedState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub va_keys: Vec<VaKey>,
}

/// One range measurement of a VA held in the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeObservation {
    /// Position of the VA in `va_keys`.
    pub slot: usize,
    pub range: f64,
    pub variance: f64,
}

impl StackedState {
    /// Agent prior plus independent VA priors from the geometry module.
    pub fn new(agent: AgentState, agent_cov: DMatrix<f64>, vas: &[VirtualAnchor]) -> Result<Self> {
        if agent_cov.shape() != (AGENT_DIM, AGENT_DIM) {
            return Err(MintError::Dimension("agent covariance must be 4x4".into()));
        }
        let n = AGENT_DIM + 2 * vas.len();
        let mut mean = DVector::zeros(n);
        mean[0] = agent.p.x;
        mean[1] = agent.p.y;
        mean[2] = agent.v.x;
        mean[3] = agent.v.y;
        let mut cov = DMatrix::zeros(n, n);
        cov.view_mut((0, 0), (AGENT_DIM, AGENT_DIM)).copy_from(&agent_cov);
        for (i, va) in vas.iter().enumerate() {
            let o = AGENT_DIM + 2 * i;
            mean[o] = va.mean.x;
            mean[o + 1] = va.mean.y;
            cov.view_mut((o, o), (2, 2)).copy_from(&va.cov);
        }
        let mut s = Self {
            mean,
            cov,
            va_keys: vas.iter().map(|v| v.key()).collect(),
        };
        s.condition();
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn agent(&self) -> AgentState {
        AgentState {
            p: Point2::new(self.mean[0], self.mean[1]),
            v: Point2::new(self.mean[2], self.mean[3]),
        }
    }

    pub fn agent_cov(&self) -> DMatrix<f64> {
        self.cov.view((0, 0), (AGENT_DIM, AGENT_DIM)).into_owned()
    }

    pub fn slot_of(&self, key: VaKey) -> Option<usize> {
        self.va_keys.iter().position(|k| *k == key)
    }

    pub fn va_position(&self, slot: usize) -> Point2 {
        let o = AGENT_DIM + 2 * slot;
        Point2::new(self.mean[o], self.mean[o + 1])
    }

    pub fn va_cov(&self, slot: usize) -> nalgebra::Matrix2<f64> {
        let o = AGENT_DIM + 2 * slot;
        self.cov.fixed_view::<2, 2>(o, o).into_owned()
    }

    /// Marginal over the agent and the given VA slots (in that order).
    pub fn marginal(&self, slots: &[usize]) -> StackedState {
        let idx: Vec<usize> = (0..AGENT_DIM)
            .chain(slots.iter().flat_map(|&k| [AGENT_DIM + 2 * k, AGENT_DIM + 2 * k + 1]))
            .collect();
        StackedState {
            mean: DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.mean[i])),
            cov: DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.cov[(idx[r], idx[c])]),
            va_keys: slots.iter().map(|&k| self.va_keys[k]).collect(),
        }
    }

    /// Covariance of `p − a_k` (agent position relative to VA `slot`).
    pub fn relative_cov(&self, slot: usize) -> nalgebra::Matrix2<f64> {
        let o = AGENT_DIM + 2 * slot;
        let pp = self.cov.fixed_view::<2, 2>(0, 0);
        let pa = self.cov.fixed_view::<2, 2>(0, o);
        let aa = self.cov.fixed_view::<2, 2>(o, o);
        pp - pa - pa.transpose() + aa
    }

    /// Symmetrize and floor eigenvalues at 1e-12.
    pub fn condition(&mut self) {
        condition_cov(&mut self.cov);
    }
}

fn condition_cov(cov: &mut DMatrix<f64>) {
    let sym = (&*cov + cov.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym.clone());
    if eig.eigenvalues.iter().all(|&l| l >= EIGEN_FLOOR) {
        *cov = sym;
        return;
    }
    let floored = eig.eigenvalues.map(|l| l.max(EIGEN_FLOOR));
    let v = &eig.eigenvectors;
    let rebuilt = v * DMatrix::from_diagonal(&floored) * v.transpose();
    *cov = (&rebuilt + rebuilt.transpose()) * 0.5;
}

/// Constant-velocity prediction; VA blocks carried through unchanged.
pub fn predict(s: &StackedState, m: &MotionModel) -> StackedState {
    let n = s.dim();
    let f = m.transition();
    let mut mean = s.mean.clone();
    let agent = &f * s.mean.rows(0, AGENT_DIM);
    mean.rows_mut(0, AGENT_DIM).copy_from(&agent);

    let mut cov = s.cov.clone();
    let paa = s.cov.view((0, 0), (AGENT_DIM, AGENT_DIM));
    let new_paa = &f * paa * f.transpose() + m.process_noise();
    cov.view_mut((0, 0), (AGENT_DIM, AGENT_DIM)).copy_from(&new_paa);
    if n > AGENT_DIM {
        let rest = n - AGENT_DIM;
        let pax = &f * s.cov.view((0, AGENT_DIM), (AGENT_DIM, rest));
        cov.view_mut((0, AGENT_DIM), (AGENT_DIM, rest)).copy_from(&pax);
        cov.view_mut((AGENT_DIM, 0), (rest, AGENT_DIM)).copy_from(&pax.transpose());
    }
    let mut out = StackedState {
        mean,
        cov,
        va_keys: s.va_keys.clone(),
    };
    out.condition();
    out
}

struct SigmaPoints {
    points: Vec<DVector<f64>>,
    wm: Vec<f64>,
    wc: Vec<f64>,
}

fn sigma_points(mean: &DVector<f64>, cov: &DMatrix<f64>, ut: &UtParams) -> Result<SigmaPoints> {
    let n = mean.len() as f64;
    let lambda = ut.alpha * ut.alpha * (n + ut.kappa) - n;
    let scaled = cov * (n + lambda);
    let l = scaled.cholesky().ok_or(MintError::NotPositiveDefinite)?.unpack();
    let mut points = Vec::with_capacity(2 * mean.len() + 1);
    points.push(mean.clone());
    for i in 0..mean.len() {
        points.push(mean + l.column(i));
    }
    for i in 0..mean.len() {
        points.push(mean - l.column(i));
    }
    let w = 1.0 / (2.0 * (n + lambda));
    let mut wm = vec![w; points.len()];
    let mut wc = vec![w; points.len()];
    wm[0] = lambda / (n + lambda);
    wc[0] = wm[0] + (1.0 - ut.alpha * ut.alpha + ut.beta);
    Ok(SigmaPoints { points, wm, wc })
}

/// Predicted measurement mean of `h` under the unscented transform.
pub fn predicted_measurement<H>(s: &StackedState, h: H, ut: &UtParams) -> Result<DVector<f64>>
where
    H: Fn(&DVector<f64>) -> DVector<f64>,
{
    let sp = sigma_points(&s.mean, &s.cov, ut)?;
    let zs: Vec<DVector<f64>> = sp.points.iter().map(&h).collect();
    let mut zbar = DVector::zeros(zs[0].len());
    for (z, w) in zs.iter().zip(&sp.wm) {
        zbar += z * *w;
    }
    Ok(zbar)
}

/// Generic UKF measurement update with diagonal noise `r_diag`.
pub fn ukf_update<H>(s: &StackedState, h: H, z: &DVector<f64>, r_diag: &[f64], ut: &UtParams) -> Result<StackedState>
where
    H: Fn(&DVector<f64>) -> DVector<f64>,
{
    let dz = z.len();
    if dz == 0 {
        return Ok(s.clone());
    }
    if r_diag.len() != dz {
        return Err(MintError::Dimension("measurement noise length".into()));
    }
    let sp = sigma_points(&s.mean, &s.cov, ut)?;
    let zs: Vec<DVector<f64>> = sp.points.iter().map(&h).collect();
    let mut zbar = DVector::zeros(dz);
    for (zi, w) in zs.iter().zip(&sp.wm) {
        zbar += zi * *w;
    }
    let n = s.dim();
    let mut szz = DMatrix::from_diagonal(&DVector::from_column_slice(r_diag));
    let mut pxz = DMatrix::zeros(n, dz);
    for ((x, zi), w) in sp.points.iter().zip(&zs).zip(&sp.wc) {
        let dzv = zi - &zbar;
        let dxv = x - &s.mean;
        szz += &dzv * dzv.transpose() * *w;
        pxz += &dxv * dzv.transpose() * *w;
    }
    let szz = (&szz + szz.transpose()) * 0.5;
    let chol = szz.clone().cholesky().ok_or(MintError::NotPositiveDefinite)?;
    // K = Pxz S⁻¹
    let gain = chol.solve(&pxz.transpose()).transpose();
    let mean = &s.mean + &gain * (z - &zbar);
    let cov = &s.cov - &gain * &szz * gain.transpose();
    let mut out = StackedState {
        mean,
        cov,
        va_keys: s.va_keys.clone(),
    };
    out.condition();
    Ok(out)
}

fn range_function(slots: Vec<usize>) -> impl Fn(&DVector<f64>) -> DVector<f64> {
    move |x: &DVector<f64>| {
        DVector::from_iterator(
            slots.len(),
            slots.iter().map(|&k| {
                let o = AGENT_DIM + 2 * k;
                (x[0] - x[o]).hypot(x[1] - x[o + 1])
            }),
        )
    }
}

/// Joint agent/VA update from the ranges of the associated VAs.
pub fn update(s: &StackedState, obs: &[RangeObservation], ut: &UtParams) -> Result<StackedState> {
    let obs: Vec<&RangeObservation> = obs.iter().filter(|o| o.variance.is_finite()).collect();
    if obs.is_empty() {
        return Ok(s.clone());
    }
    if let Some(o) = obs.iter().find(|o| o.slot >= s.va_keys.len()) {
        return Err(MintError::Dimension(format!("VA slot {} not in state", o.slot)));
    }
    let h = range_function(obs.iter().map(|o| o.slot).collect());
    let z = DVector::from_iterator(obs.len(), obs.iter().map(|o| o.range));
    let r: Vec<f64> = obs.iter().map(|o| o.variance).collect();
    ukf_update(s, h, &z, &r, ut)
}

/// Predicted ranges (UKF measurement mean) for the given slots.
pub fn predicted_ranges(s: &StackedState, slots: &[usize], ut: &UtParams) -> Result<DVector<f64>> {
    if slots.is_empty() {
        return Ok(DVector::zeros(0));
    }
    predicted_measurement(s, range_function(slots.to_vec()), ut)
}

/// Entropy of the agent block (controller feedback) or of the whole state.
pub fn posterior_entropy(s: &StackedState, agent_only: bool) -> Result<f64> {
    if agent_only {
        gaussian_entropy(&s.agent_cov())
    } else {
        gaussian_entropy(&s.cov)
    }
}

/// Measurement-free covariance rollout: for each of `horizon` steps, predict
/// and then update with hypothetical per-slot range variances, linearizing
/// at the predicted mean (zero innovation). Non-finite variances carry no
/// information. Returns the posterior covariances.
pub fn predict_covariance_rollout(
    s: &StackedState,
    m: &MotionModel,
    hypothetical: &[(usize, f64)],
    horizon: usize,
    ut: &UtParams,
) -> Result<Vec<DMatrix<f64>>> {
    let slots: Vec<(usize, f64)> = hypothetical.iter().copied().filter(|(_, v)| v.is_finite()).collect();
    let mut state = s.clone();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        state = predict(&state, m);
        if !slots.is_empty() {
            let h = range_function(slots.iter().map(|(k, _)| *k).collect());
            let zbar = predicted_measurement(&state, &h, ut)?;
            let r: Vec<f64> = slots.iter().map(|(_, v)| *v).collect();
            state = ukf_update(&state, h, &zbar, &r, ut)?;
        }
        out.push(state.cov.clone());
    }
    Ok(out)
}
