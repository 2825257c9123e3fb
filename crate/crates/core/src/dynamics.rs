//! Right-hand sides of the static and adaptive systems, a fixed-step RK4
//! integrator and convergence detection.
//!
//! The phase equation uses the lagged repulsive-sign convention
//! `dθ_i = ω − (1/N) Σ_j κ_ij sin(θ_i − θ_j + α)`, which for `α = 0` is the
//! attractive form `(1/N) Σ_j κ_ij sin(θ_j − θ_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::model::{
    circular_diameter, order_parameter, phase_diameter, split_two_clusters, CouplingMatrix,
    ModelParams, PhaseState,
};

/// Phases, coupling matrix and time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub theta: PhaseState,
    pub kappa: CouplingMatrix,
    pub time: f64,
}

impl SystemState {
    pub fn new(theta: PhaseState, kappa: CouplingMatrix) -> Result<Self> {
        let s = Self {
            theta,
            kappa,
            time: 0.0,
        };
        s.check_dims()?;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    pub fn check_dims(&self) -> Result<()> {
        if self.theta.len() != self.kappa.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.theta.len(),
                found: self.kappa.dim(),
            });
        }
        Ok(())
    }
}

/// Fixed-step RK4 settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub step: f64,
    pub t_end: f64,
    /// Record every this many steps; the initial and final states are always kept.
    #[serde(default = "default_sample_every")]
    pub sample_every: usize,
}

fn default_sample_every() -> usize {
    1
}

/// Largest accepted step size.
pub const MAX_STEP: f64 = 0.1;

impl IntegratorConfig {
    pub fn new(step: f64, t_end: f64, sample_every: usize) -> Result<Self> {
        let c = Self {
            step,
            t_end,
            sample_every,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step <= MAX_STEP) {
            return Err(Error::invalid("step", format!("need 0 < h <= {MAX_STEP}")));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::invalid("t_end", "must be positive and finite"));
        }
        if self.sample_every == 0 {
            return Err(Error::invalid("sample_every", "must be >= 1"));
        }
        if self.t_end / self.step > 1e9 {
            return Err(Error::invalid("t_end", "too many steps"));
        }
        Ok(())
    }

    /// Number of steps; the final time lies within half a step of `t_end`.
    pub fn steps(&self) -> usize {
        ((self.t_end / self.step).round() as usize).max(1)
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step: 1e-2,
            t_end: 50.0,
            sample_every: 10,
        }
    }
}

/// Per-sample summary: lifted diameter, `R_1`, `R_2`, and the κ extremes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub diameter: f64,
    pub r1: f64,
    pub r2: f64,
    pub kmin: f64,
    pub kmax: f64,
}

impl Diagnostics {
    pub fn of(state: &SystemState) -> Self {
        let theta = state.theta.as_slice();
        Self {
            diameter: phase_diameter(theta),
            r1: order_parameter(theta, 1).map(|o| o.r).unwrap_or(0.0),
            r2: order_parameter(theta, 2).map(|o| o.r).unwrap_or(0.0),
            kmin: state.kappa.min_entry(),
            kmax: state.kappa.max_entry(),
        }
    }
}

/// Sampled solution with diagnostics aligned to `samples`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<SystemState>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&SystemState> {
        self.samples.last()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.time)
    }
}

/// Precomputed lag trigonometry.
#[derive(Clone, Copy)]
struct Lags {
    sa: f64,
    ca: f64,
    sb: f64,
    cb: f64,
}

impl Lags {
    fn new(p: &ModelParams) -> Self {
        let (sa, ca) = p.alpha.sin_cos();
        let (sb, cb) = p.beta.sin_cos();
        Self { sa, ca, sb, cb }
    }
}

/// Shared kernel: fills `dtheta` and, when given, `dkappa` (row-major).
fn eval_rhs(
    theta: &[f64],
    kappa: &[f64],
    p: &ModelParams,
    lags: Lags,
    dtheta: &mut [f64],
    mut dkappa: Option<&mut [f64]>,
) {
    let n = theta.len();
    let inv_n = 1.0 / n as f64;
    let adapt = p.epsilon != 0.0;
    dtheta.fill(0.0);
    for i in 0..n {
        // diagonal: sin(α) and sin(β) at zero phase difference
        dtheta[i] -= kappa[i * n + i] * lags.sa;
        if let Some(dk) = dkappa.as_deref_mut() {
            dk[i * n + i] = if adapt {
                -p.epsilon * (lags.sb + kappa[i * n + i])
            } else {
                0.0
            };
        }
        for j in (i + 1)..n {
            let (s, c) = (theta[i] - theta[j]).sin_cos();
            // sin(±d + α) and sin(±d + β) by angle addition
            let sij_a = s * lags.ca + c * lags.sa;
            let sji_a = -s * lags.ca + c * lags.sa;
            dtheta[i] -= kappa[i * n + j] * sij_a;
            dtheta[j] -= kappa[j * n + i] * sji_a;
            if let Some(dk) = dkappa.as_deref_mut() {
                if adapt {
                    let sij_b = s * lags.cb + c * lags.sb;
                    let sji_b = -s * lags.cb + c * lags.sb;
                    dk[i * n + j] = -p.epsilon * (sij_b + kappa[i * n + j]);
                    dk[j * n + i] = -p.epsilon * (sji_b + kappa[j * n + i]);
                } else {
                    dk[i * n + j] = 0.0;
                    dk[j * n + i] = 0.0;
                }
            }
        }
    }
    for d in dtheta.iter_mut() {
        *d = p.omega + *d * inv_n;
    }
}

/// Time derivatives `(dθ, dκ)` of the adaptive system.
pub fn rhs_adaptive(
    state: &SystemState,
    params: &ModelParams,
) -> Result<(Vec<f64>, CouplingMatrix)> {
    state.check_dims()?;
    let n = state.n();
    let mut dtheta = vec![0.0; n];
    let mut dkappa = SquareMatrix::zeros(n);
    eval_rhs(
        state.theta.as_slice(),
        state.kappa.as_slice(),
        params,
        Lags::new(params),
        &mut dtheta,
        Some(dkappa.as_mut_slice()),
    );
    Ok((dtheta, dkappa))
}

/// Phase velocities with the coupling held fixed.
pub fn rhs_static(
    theta: &PhaseState,
    kappa: &CouplingMatrix,
    params: &ModelParams,
) -> Result<Vec<f64>> {
    if theta.len() != kappa.dim() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            found: kappa.dim(),
        });
    }
    let mut dtheta = vec![0.0; theta.len()];
    eval_rhs(
        theta.as_slice(),
        kappa.as_slice(),
        params,
        Lags::new(params),
        &mut dtheta,
        None,
    );
    Ok(dtheta)
}

/// RK4 scratch space for a flattened `(θ, κ)` state.
struct Rk4 {
    n: usize,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        let len = n + n * n;
        Self {
            n,
            k: std::array::from_fn(|_| vec![0.0; len]),
            tmp: vec![0.0; len],
        }
    }

    fn deriv(n: usize, y: &[f64], p: &ModelParams, lags: Lags, out: &mut [f64]) {
        let (th, ka) = y.split_at(n);
        let (dth, dka) = out.split_at_mut(n);
        eval_rhs(th, ka, p, lags, dth, Some(dka));
    }

    fn step(&mut self, y: &mut [f64], h: f64, p: &ModelParams, lags: Lags) {
        let n = self.n;
        let [k1, k2, k3, k4] = &mut self.k;
        Self::deriv(n, y, p, lags, k1);
        for ((t, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(k1.iter()) {
            *t = yi + 0.5 * h * k;
        }
        Self::deriv(n, &self.tmp, p, lags, k2);
        for ((t, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(k2.iter()) {
            *t = yi + 0.5 * h * k;
        }
        Self::deriv(n, &self.tmp, p, lags, k3);
        for ((t, &yi), &k) in self.tmp.iter_mut().zip(y.iter()).zip(k3.iter()) {
            *t = yi + h * k;
        }
        Self::deriv(n, &self.tmp, p, lags, k4);
        let h6 = h / 6.0;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += h6 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }
    }
}

/// Integrates and hands every sampled state to `observe` instead of storing it.
///
/// Returns the final state.
pub fn integrate_observed(
    state0: &SystemState,
    params: &ModelParams,
    cfg: &IntegratorConfig,
    mut observe: impl FnMut(&SystemState),
) -> Result<SystemState> {
    state0.check_dims()?;
    params.validate()?;
    cfg.validate()?;
    let n = state0.n();
    let steps = cfg.steps();
    let lags = Lags::new(params);

    let mut y = Vec::with_capacity(n + n * n);
    y.extend_from_slice(state0.theta.as_slice());
    y.extend_from_slice(state0.kappa.as_slice());
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { step: 0 });
    }

    let unpack = |y: &[f64], time: f64| SystemState {
        theta: PhaseState::from_vec_unchecked(y[..n].to_vec()),
        kappa: SquareMatrix::from_row_major(n, y[n..].to_vec()).expect("sized by construction"),
        time,
    };

    let t0 = state0.time;
    observe(&unpack(&y, t0));
    let mut rk = Rk4::new(n);
    for step in 1..=steps {
        rk.step(&mut y, cfg.step, params, lags);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step });
        }
        if step % cfg.sample_every == 0 || step == steps {
            observe(&unpack(&y, t0 + step as f64 * cfg.step));
        }
    }
    Ok(unpack(&y, t0 + steps as f64 * cfg.step))
}

/// Classical fixed-step RK4; bit-identical for identical inputs.
pub fn integrate(
    state0: &SystemState,
    params: &ModelParams,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let mut samples = Vec::new();
    integrate_observed(state0, params, cfg, |s| samples.push(s.clone()))?;
    let diagnostics = samples.iter().map(Diagnostics::of).collect();
    Ok(Trajectory {
        samples,
        diagnostics,
    })
}

/// Outcome of [`detect_sync`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SyncKind {
    CompleteSync,
    AntipodalSync { partition: (Vec<usize>, Vec<usize>) },
    NotConverged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncVerdict {
    #[serde(flatten)]
    pub kind: SyncKind,
    /// Mean intra-cluster coupling at the final sample; only set when converged.
    pub asymptotic_kappa: Option<f64>,
    /// Circular diameter of the final phases.
    pub final_diameter: f64,
}

impl SyncVerdict {
    pub fn converged(&self) -> bool {
        !matches!(self.kind, SyncKind::NotConverged)
    }
}

pub const DEFAULT_TOL_PHASE: f64 = 1e-6;
pub const DEFAULT_TOL_KAPPA: f64 = 1e-3;

/// Trailing window used for convergence tests: the last 10% of samples.
fn trailing_window(samples: &[SystemState]) -> &[SystemState] {
    let len = samples.len();
    let w = len.div_ceil(10).max(1);
    &samples[len - w..]
}

/// Worst `|κ̃_ij + sin β|` and `κ̃` mean, where `κ̃` flips signs across `side`.
fn kappa_deviation(kappa: &CouplingMatrix, side: &[bool], sin_beta: f64) -> (f64, f64) {
    let n = kappa.dim();
    let mut worst = 0.0f64;
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            let sign = if side[i] == side[j] { 1.0 } else { -1.0 };
            let k = sign * kappa.get(i, j);
            worst = worst.max((k + sin_beta).abs());
            sum += k;
        }
    }
    (worst, sum / (n * n) as f64)
}

/// Decides complete or antipodal synchronization over the trailing window.
pub fn detect_sync(traj: &Trajectory, beta: f64, tol_phase: f64, tol_kappa: f64) -> SyncVerdict {
    let Some(last) = traj.samples.last() else {
        return SyncVerdict {
            kind: SyncKind::NotConverged,
            asymptotic_kappa: None,
            final_diameter: 0.0,
        };
    };
    let n = last.n();
    let sin_beta = beta.sin();
    let final_diameter = circular_diameter(last.theta.as_slice());
    let window = trailing_window(&traj.samples);

    let holds = |side: &[bool]| -> Option<f64> {
        let mut mean = 0.0;
        for s in window {
            // undo the π shift on the second cluster before measuring
            let shifted: Vec<f64> = s
                .theta
                .as_slice()
                .iter()
                .zip(side)
                .map(|(&t, &second)| if second { t - std::f64::consts::PI } else { t })
                .collect();
            if circular_diameter(&shifted) >= tol_phase {
                return None;
            }
            let (dev, m) = kappa_deviation(&s.kappa, side, sin_beta);
            if dev >= tol_kappa {
                return None;
            }
            mean = m;
        }
        Some(mean)
    };

    let trivial = vec![false; n];
    if let Some(k) = holds(&trivial) {
        return SyncVerdict {
            kind: SyncKind::CompleteSync,
            asymptotic_kappa: Some(k),
            final_diameter,
        };
    }
    let (first, second) = split_two_clusters(last.theta.as_slice());
    if !second.is_empty() {
        let mut side = vec![false; n];
        for &i in &second {
            side[i] = true;
        }
        if let Some(k) = holds(&side) {
            return SyncVerdict {
                kind: SyncKind::AntipodalSync {
                    partition: (first, second),
                },
                asymptotic_kappa: Some(k),
                final_diameter,
            };
        }
    }
    SyncVerdict {
        kind: SyncKind::NotConverged,
        asymptotic_kappa: None,
        final_diameter,
    }
}
