//! Invariant sets, synchronization conditions and the critical diameter of the
//! adaptive model (`α = 0`, `ω = 0`).

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    detect_sync, integrate, integrate_observed, IntegratorConfig, SyncKind, SyncVerdict,
    SystemState, DEFAULT_TOL_KAPPA, DEFAULT_TOL_PHASE,
};
use crate::error::{Error, Result};
use crate::model::{canonical_angle, phase_diameter, require_negative_beta, ModelParams};

/// Node indices on the arc at 0 and on the arc at π.
pub type Partition = (Vec<usize>, Vec<usize>);

/// Two phase arcs of width `c` at `0` and `π` plus sign-separated coupling boxes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantSetSpec {
    pub c: f64,
    pub delta: f64,
    pub partition: Partition,
}

impl InvariantSetSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        if !(0.0..PI / 2.0).contains(&self.c) {
            return Err(Error::invalid("c", "must lie in [0, pi/2)"));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::invalid("delta", "must lie in [0, 1)"));
        }
        let mut seen = vec![false; n];
        for &i in self.partition.0.iter().chain(&self.partition.1) {
            if i >= n || seen[i] {
                return Err(Error::invalid("partition", "must split 0..n disjointly"));
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("partition", "must cover every node"));
        }
        Ok(())
    }

    /// `side[i]` is true for nodes on the arc at π.
    pub fn sides(&self, n: usize) -> Vec<bool> {
        let mut side = vec![false; n];
        for &i in &self.partition.1 {
            side[i] = true;
        }
        side
    }
}

fn delta_star_raw(beta: f64, c: f64) -> f64 {
    -(beta - c).sin().max((beta + c).sin())
}

/// `δ*(β, c) = −max(sin(β − c), sin(β + c))`.
pub fn delta_star(beta: f64, c: f64) -> Result<f64> {
    require_negative_beta(beta)?;
    if !(0.0..PI / 2.0).contains(&c) {
        return Err(Error::invalid("c", "must lie in [0, pi/2)"));
    }
    Ok(delta_star_raw(beta, c))
}

/// `f(x) = csc x − cot x`, which equals `tan(x/2)`.
pub fn f_gauge(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < PI) {
        return Err(Error::invalid("x", "must lie in (0, pi)"));
    }
    Ok(f_unchecked(x))
}

fn f_unchecked(x: f64) -> f64 {
    // (1 − cos x)/sin x and sin x/(1 + cos x) are both csc − cot; each is
    // cancellation-free on its own half of (0, π)
    let (s, c) = x.sin_cos();
    if x <= PI / 2.0 {
        s / (1.0 + c)
    } else {
        (1.0 - c) / s
    }
}

/// Inverse of the gauge on `[0, ∞)`.
fn f_inverse(y: f64) -> f64 {
    2.0 * y.atan()
}

/// Distance from `phase` to the arc `[start, start + c]` on the circle.
fn arc_distance(phase: f64, start: f64, c: f64) -> f64 {
    let u = canonical_angle(phase - start);
    if u <= c {
        0.0
    } else {
        (u - c).min(TAU - u)
    }
}

/// Membership in the invariant set for a fixed partition, with slack on every bound.
pub fn membership_with_partition(
    state: &SystemState,
    c: f64,
    delta: f64,
    side: &[bool],
    slack: f64,
) -> std::result::Result<(), String> {
    let theta = state.theta.as_slice();
    for (i, (&t, &second)) in theta.iter().zip(side).enumerate() {
        let start = if second { PI } else { 0.0 };
        let d = arc_distance(t, start, c);
        if d > slack {
            return Err(format!("phase {i} outside its arc by {d:.3e}"));
        }
    }
    let n = theta.len();
    for i in 0..n {
        for j in 0..n {
            let k = state.kappa.get(i, j);
            let ok = if side[i] == side[j] {
                k >= delta - slack && k <= 1.0 + slack
            } else {
                k >= -1.0 - slack && k <= -delta + slack
            };
            if !ok {
                return Err(format!("kappa[{i}][{j}] = {k:.6e} outside its box"));
            }
        }
    }
    Ok(())
}

/// Tests the literal arcs `[0, c] ∪ [π, π + c]`; nodes go to the nearer arc.
///
/// Returns the witness partition on success.
pub fn membership(state: &SystemState, c: f64, delta: f64) -> (bool, Option<Partition>) {
    let side: Vec<bool> = state
        .theta
        .as_slice()
        .iter()
        .map(|&t| arc_distance(t, PI, c) < arc_distance(t, 0.0, c))
        .collect();
    if membership_with_partition(state, c, delta, &side, 0.0).is_err() {
        return (false, None);
    }
    let (first, second): (Vec<usize>, Vec<usize>) = (0..side.len()).partition(|&i| !side[i]);
    (true, Some((first, second)))
}

/// Result of one invariance trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceOutcome {
    /// First `(time, constraint)` that left the set, if any.
    pub first_violation: Option<(f64, String)>,
    /// Smallest intra-group coupling at the end of the attraction run.
    pub final_min_intra: f64,
    /// Whether `final_min_intra` exceeded `δ* − attraction_tol`.
    pub attracted: bool,
    pub delta_star: f64,
}

/// Horizon for the attraction part of an invariance trial: long enough for
/// `e^{−ε t}` to fall below `e^{−10}`.
pub fn attraction_horizon(epsilon: f64, t_end: f64) -> f64 {
    if epsilon > 0.0 {
        t_end.max(10.0 / epsilon)
    } else {
        t_end
    }
}

/// Integrates from a point of `𝒜_{c,δ}`, checking membership at every sample
/// over `[0, cfg.t_end]` and attraction toward `𝒜_{c,δ*}` at the attraction horizon.
pub fn check_invariance(
    state0: &SystemState,
    set: &InvariantSetSpec,
    params: &ModelParams,
    cfg: &IntegratorConfig,
    slack: f64,
    attraction_tol: f64,
) -> Result<InvarianceOutcome> {
    let n = state0.n();
    set.validate(n)?;
    let ds = delta_star(params.beta, set.c)?;
    if ds <= 0.0 {
        return Err(Error::Precondition(format!(
            "delta*(beta, c) = {ds:.6} is not positive"
        )));
    }
    if set.delta >= ds {
        return Err(Error::Precondition(format!(
            "delta = {} must be below delta* = {ds:.6}",
            set.delta
        )));
    }
    let side = set.sides(n);
    if let Err(e) = membership_with_partition(state0, set.c, set.delta, &side, 0.0) {
        return Err(Error::Precondition(format!(
            "initial state not in the set: {e}"
        )));
    }

    let horizon = attraction_horizon(params.epsilon, cfg.t_end);
    let run = IntegratorConfig {
        t_end: horizon,
        ..*cfg
    };
    let mut first_violation = None;
    let last = integrate_observed(state0, params, &run, |s| {
        if first_violation.is_none() && s.time <= cfg.t_end + 0.5 * cfg.step {
            if let Err(e) = membership_with_partition(s, set.c, set.delta, &side, slack) {
                first_violation = Some((s.time, e));
            }
        }
    })?;
    let mut final_min_intra = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            if side[i] == side[j] {
                final_min_intra = final_min_intra.min(last.kappa.get(i, j));
            }
        }
    }
    Ok(InvarianceOutcome {
        first_violation,
        final_min_intra,
        attracted: final_min_intra > ds - attraction_tol,
        delta_star: ds,
    })
}

/// Sufficient conditions for complete synchronization from positive couplings.
///
/// The phase-diameter bound `min(π + β, |β|)` must also be below `π/2`; that
/// strict check excludes `β = −π/2` and can be waived with `allow_boundary`.
pub fn check_thm1_conditions(state0: &SystemState, beta: f64, allow_boundary: bool) -> bool {
    if require_negative_beta(beta).is_err() {
        return false;
    }
    let bound = (PI + beta).min(-beta);
    let d0 = phase_diameter(state0.theta.as_slice());
    let below_right_angle = bound < PI / 2.0 || (allow_boundary && bound <= PI / 2.0);
    d0 < bound && below_right_angle && state0.kappa.min_entry() > 0.0
}

/// Analytic envelope `2·f⁻¹(f(d0/2)·exp(−δ*(β, d0)·cos(d0)·t))` on the phase diameter.
pub fn diameter_bound(t: f64, d0: f64, beta: f64) -> f64 {
    if d0 <= 0.0 {
        return 0.0;
    }
    let rate = delta_star_raw(beta, d0) * d0.cos();
    2.0 * f_inverse(f_unchecked(d0 / 2.0) * (-rate * t).exp())
}

/// Asymptotic bounds on couplings once all phase gaps are below `ζ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaEnvelope {
    pub zeta: f64,
    pub upper: f64,
    pub lower: f64,
}

pub fn kappa_envelope(beta: f64, zeta: f64) -> Result<KappaEnvelope> {
    require_negative_beta(beta)?;
    let limit = 0.5 * (PI + beta).min(-beta);
    if !(zeta > 0.0 && zeta <= limit) {
        return Err(Error::invalid(
            "zeta",
            format!("must lie in (0, {limit:.6}]"),
        ));
    }
    let vals = [(-zeta - beta).sin(), (zeta - beta).sin(), (-beta).sin()];
    Ok(KappaEnvelope {
        zeta,
        upper: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        lower: vals.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

/// Time after which every coupling is guaranteed nonnegative:
/// `(1/ε)·ln((δ* − κ_min⁰)/δ*)`.
pub fn kappa_nonneg_time(epsilon: f64, delta_star_val: f64, kappa_min0: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid("epsilon", "must be > 0"));
    }
    if !(delta_star_val > 0.0) {
        return Err(Error::invalid("delta_star", "must be > 0"));
    }
    if !(kappa_min0 < 0.0) {
        return Err(Error::invalid("kappa_min0", "must be < 0"));
    }
    Ok(((delta_star_val - kappa_min0) / delta_star_val).ln() / epsilon)
}

/// Default resolution of the critical-diameter scan.
pub const DEFAULT_DBAR_GRID: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalDiameterResult {
    pub d_bar: f64,
    /// Objective at the maximizer; underflows to 0 for small `ε`.
    pub objective_at_max: f64,
    /// Natural log of the objective at the maximizer.
    pub log_objective_at_max: f64,
    pub grid_resolution: f64,
    pub argmax_index: usize,
}

/// Grid argmax of `f(D/2)·exp((δ*/ε)·ln((δ* − κ)/δ*) + κ/ε)`, `δ* = δ*(β, D)`,
/// over `[0, min(π + β, |β|)]`.
///
/// Compared in the log domain: the linear objective underflows for small `ε`.
/// Points with `δ* ≤ 0` are skipped and ties go to the smaller diameter.
pub fn critical_diameter(
    beta: f64,
    epsilon: f64,
    kappa_min0: f64,
    grid_points: usize,
) -> Result<CriticalDiameterResult> {
    require_negative_beta(beta)?;
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid("epsilon", "must be positive and finite"));
    }
    if !(kappa_min0 < 0.0) {
        return Err(Error::invalid("kappa_min0", "must be < 0"));
    }
    if grid_points < 1000 {
        return Err(Error::invalid("grid_points", "need at least 1000"));
    }
    let d_max = (PI + beta).min(-beta);
    let step = d_max / (grid_points - 1) as f64;
    let mut best: Option<(usize, f64)> = None;
    for i in 0..grid_points {
        let d = i as f64 * step;
        let ds = delta_star_raw(beta, d);
        if ds <= 0.0 {
            continue;
        }
        let log_obj = log_dbar_objective(d, ds, epsilon, kappa_min0);
        if best.is_none_or(|(_, b)| log_obj > b) {
            best = Some((i, log_obj));
        }
    }
    Ok(match best {
        Some((i, log_obj)) => CriticalDiameterResult {
            d_bar: i as f64 * step,
            objective_at_max: log_obj.exp(),
            log_objective_at_max: log_obj,
            grid_resolution: step,
            argmax_index: i,
        },
        None => CriticalDiameterResult {
            d_bar: 0.0,
            objective_at_max: 0.0,
            log_objective_at_max: f64::NEG_INFINITY,
            grid_resolution: step,
            argmax_index: 0,
        },
    })
}

fn log_dbar_objective(d: f64, ds: f64, epsilon: f64, kappa_min0: f64) -> f64 {
    let log_f = if d > 0.0 {
        f_unchecked(d / 2.0).ln()
    } else {
        f64::NEG_INFINITY
    };
    log_f + (ds * ((ds - kappa_min0) / ds).ln() + kappa_min0) / epsilon
}

/// Critical diameters on a `(β, ε, κ_min⁰)` product grid, `β` slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub betas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub kappas: Vec<f64>,
    pub grid_points: usize,
    pub values: Vec<f64>,
}

impl SweepTable {
    pub fn get(&self, ib: usize, ie: usize, ik: usize) -> f64 {
        self.values[(ib * self.epsilons.len() + ie) * self.kappas.len() + ik]
    }

    /// Rows `(β, ε, κ, D̄)` in storage order.
    pub fn rows(&self) -> impl Iterator<Item = [f64; 4]> + '_ {
        let (ne, nk) = (self.epsilons.len(), self.kappas.len());
        self.values.iter().enumerate().map(move |(idx, &v)| {
            let (ib, rest) = (idx / (ne * nk), idx % (ne * nk));
            [
                self.betas[ib],
                self.epsilons[rest / nk],
                self.kappas[rest % nk],
                v,
            ]
        })
    }
}

/// Evaluates [`critical_diameter`] on every grid cell, in parallel.
pub fn sweep_critical_diameter(
    betas: &[f64],
    epsilons: &[f64],
    kappas: &[f64],
    grid_points: usize,
) -> Result<SweepTable> {
    if betas.is_empty() || epsilons.is_empty() || kappas.is_empty() {
        return Err(Error::invalid(
            "grid",
            "every axis needs at least one value",
        ));
    }
    let cells: Vec<(f64, f64, f64)> = betas
        .iter()
        .flat_map(|&b| {
            epsilons
                .iter()
                .flat_map(move |&e| kappas.iter().map(move |&k| (b, e, k)))
        })
        .collect();
    let values = cells
        .par_iter()
        .map(|&(b, e, k)| critical_diameter(b, e, k, grid_points).map(|r| r.d_bar))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SweepTable {
        betas: betas.to_vec(),
        epsilons: epsilons.to_vec(),
        kappas: kappas.to_vec(),
        grid_points,
        values,
    })
}

/// One named check with the time it was decided at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub time: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem2Report {
    pub d_bar: f64,
    pub kappa_min0: f64,
    pub nonneg_time: f64,
    /// First sample time with every coupling nonnegative.
    pub first_nonneg_time: Option<f64>,
    pub max_diameter: f64,
    pub verdict: SyncVerdict,
    pub assertions: Vec<Assertion>,
}

impl Theorem2Report {
    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }
}

/// Checks the hypotheses of the adaptive convergence result, integrates, and
/// reports the diameter cap, coupling sign recovery and final synchronization.
///
/// `T̃` is evaluated with `δ*(β, D̄)`, the weakest coupling drive inside the cap.
pub fn verify_theorem2(
    state0: &SystemState,
    params: &ModelParams,
    cfg: &IntegratorConfig,
    grid_points: usize,
) -> Result<Theorem2Report> {
    require_negative_beta(params.beta)?;
    let beta = params.beta;
    let kappa_min0 = state0.kappa.min_entry();
    if !(kappa_min0 < 0.0) {
        return Err(Error::Precondition("need kappa_min0 < 0".into()));
    }
    if !(params.epsilon > 0.0) {
        return Err(Error::Precondition(
            "epsilon = 0 leaves no admissible diameter".into(),
        ));
    }
    let d0 = phase_diameter(state0.theta.as_slice());
    let d_limit = (PI + beta).min(-beta);
    if d0 > d_limit {
        return Err(Error::Precondition(format!(
            "initial diameter {d0:.6} exceeds min(pi + beta, |beta|) = {d_limit:.6}"
        )));
    }
    let crit = critical_diameter(beta, params.epsilon, kappa_min0, grid_points)?;
    let d_bar = crit.d_bar;
    if d0 > d_bar {
        return Err(Error::Precondition(format!(
            "initial diameter {d0:.6} exceeds the critical diameter {d_bar:.6}"
        )));
    }
    let nonneg_time = kappa_nonneg_time(params.epsilon, delta_star_raw(beta, d_bar), kappa_min0)?;

    let traj = integrate(state0, params, cfg)?;
    let mut assertions = Vec::new();

    let mut worst = (0.0f64, 0.0);
    for (s, d) in traj.samples.iter().zip(&traj.diagnostics) {
        if d.diameter > worst.0 {
            worst = (d.diameter, s.time);
        }
    }
    assertions.push(Assertion {
        name: "diameter_below_dbar".into(),
        passed: worst.0 <= d_bar + 1e-6,
        time: worst.1,
        detail: format!("max diameter {:.9} vs dbar {d_bar:.9}", worst.0),
    });

    let after = nonneg_time + cfg.step;
    let mut neg = None;
    let mut first_nonneg_time = None;
    for (s, d) in traj.samples.iter().zip(&traj.diagnostics) {
        if first_nonneg_time.is_none() && d.kmin >= 0.0 {
            first_nonneg_time = Some(s.time);
        }
        if neg.is_none() && s.time >= after && d.kmin < -1e-6 {
            neg = Some((s.time, d.kmin));
        }
    }
    assertions.push(Assertion {
        name: "kappa_nonneg_after_T".into(),
        passed: neg.is_none(),
        time: neg.map_or(after, |n| n.0),
        detail: match neg {
            Some((_, k)) => format!("min kappa {k:.3e} after T = {nonneg_time:.6}"),
            None => format!("T = {nonneg_time:.6}"),
        },
    });

    let verdict = detect_sync(&traj, beta, DEFAULT_TOL_PHASE, DEFAULT_TOL_KAPPA);
    let t_final = traj.last().map_or(0.0, |s| s.time);
    assertions.push(Assertion {
        name: "complete_sync".into(),
        passed: verdict.kind == SyncKind::CompleteSync,
        time: t_final,
        detail: format!(
            "{:?}, final diameter {:.3e}",
            verdict.kind, verdict.final_diameter
        ),
    });

    Ok(Theorem2Report {
        d_bar,
        kappa_min0,
        nonneg_time,
        first_nonneg_time,
        max_diameter: worst.0,
        verdict,
        assertions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SquareMatrix;
    use crate::model::PhaseState;

    fn st(theta: &[f64], kappa: SquareMatrix) -> SystemState {
        SystemState::new(PhaseState::new(theta.to_vec()).unwrap(), kappa).unwrap()
    }

    #[test]
    fn delta_star_examples() {
        assert!((delta_star(-PI / 2.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((delta_star(-PI / 2.0, PI / 4.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        let d = delta_star(-0.1, 0.3).unwrap();
        assert!((d + 0.2f64.sin()).abs() < 1e-15 && d < 0.0);
        assert!(delta_star(0.1, 0.3).is_err());
        assert!(delta_star(-PI, 0.3).is_err());
    }

    #[test]
    fn gauge_examples() {
        assert!((f_gauge(PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
        let direct = 1.0 / (PI / 3.0).sin() - 1.0 / (PI / 3.0).tan();
        assert!((f_gauge(PI / 3.0).unwrap() - direct).abs() < 1e-15);
        assert!((f_gauge(PI / 3.0).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let (a, b, c) = (
            f_gauge(0.2).unwrap(),
            f_gauge(0.3).unwrap(),
            f_gauge(1.0).unwrap(),
        );
        assert!(a < b && b < c);
        assert!(f_gauge(0.0).is_err() && f_gauge(PI).is_err());
    }

    #[test]
    fn gauge_matches_half_angle_tangent() {
        let n = 10_000;
        for i in 1..=n {
            let x = PI * i as f64 / (n + 1) as f64;
            let f = f_gauge(x).unwrap();
            assert!((f - (x / 2.0).tan()).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn membership_examples() {
        let k = SquareMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let (ok, part) = membership(&st(&[0.1, PI + 0.1], k), 0.2, 0.5);
        assert!(ok);
        assert_eq!(part, Some((vec![0], vec![1])));

        let (ok, part) = membership(
            &st(&[0.0, 0.15, 0.05], SquareMatrix::from_fn(3, |_, _| 0.7)),
            0.2,
            0.5,
        );
        assert!(ok);
        assert_eq!(part, Some((vec![0, 1, 2], vec![])));

        // a zero cross coupling fits neither box once delta > 0
        let k = SquareMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(!membership(&st(&[0.1, PI + 0.1], k), 0.2, 0.5).0);
    }

    #[test]
    fn invariance_precondition() {
        let set = InvariantSetSpec {
            c: 0.3,
            delta: 0.99,
            partition: (vec![0, 1], vec![]),
        };
        let s = st(&[0.0, 0.1], SquareMatrix::from_fn(2, |_, _| 1.0));
        let p = ModelParams::new(0.0, 0.0, -PI / 2.0, 1.0).unwrap();
        let err = check_invariance(&s, &set, &p, &IntegratorConfig::default(), 1e-6, 1e-3);
        assert!(matches!(err, Err(Error::Precondition(_))));
    }

    #[test]
    fn frozen_couplings_keep_phase_arcs() {
        // static coupling already sign-split: only the phase constraints move
        let side = [false, true, false, true, false];
        let k = SquareMatrix::from_fn(5, |i, j| if side[i] == side[j] { 0.6 } else { -0.4 });
        let s = st(&[0.0, PI + 0.25, 0.3, PI, 0.12], k);
        let set = InvariantSetSpec {
            c: 0.3,
            delta: 0.4,
            partition: (vec![0, 2, 4], vec![1, 3]),
        };
        let p = ModelParams::new(0.0, 0.0, -1.2, 0.0).unwrap();
        let cfg = IntegratorConfig::new(0.01, 20.0, 1).unwrap();
        let out = check_invariance(&s, &set, &p, &cfg, 1e-6, 1e-3).unwrap();
        assert_eq!(out.first_violation, None);
    }

    #[test]
    fn thm1_condition_examples() {
        let pos = SquareMatrix::from_fn(3, |_, _| 0.5);
        let s = st(&[0.0, 0.5, 0.2], pos.clone());
        assert!(!check_thm1_conditions(&s, -PI / 2.0, false));
        assert!(check_thm1_conditions(&s, -PI / 2.0, true));
        assert!(check_thm1_conditions(&s, -PI / 3.0, false));
        let mut k = pos;
        k.set(1, 2, 0.0);
        assert!(!check_thm1_conditions(
            &st(&[0.0, 0.5, 0.2], k),
            -PI / 3.0,
            false
        ));
    }

    #[test]
    fn diameter_bound_examples() {
        let beta = -PI / 3.0;
        assert!((diameter_bound(0.0, 0.5, beta) - 0.5).abs() < 1e-15);
        assert!(diameter_bound(1e4, 0.5, beta) < 1e-12);
        let mut prev = 0.5;
        for i in 1..50 {
            let b = diameter_bound(i as f64 * 0.2, 0.5, beta);
            assert!(b < prev);
            prev = b;
        }
        // independent evaluation of the closed form at t = 1
        let ds = -((beta - 0.5).sin()).max((beta + 0.5).sin());
        let want = 4.0 * ((0.125f64).tan() * (-ds * 0.5f64.cos()).exp()).atan();
        assert!((diameter_bound(1.0, 0.5, beta) - want).abs() < 1e-14);
    }

    #[test]
    fn envelope_examples() {
        let e = kappa_envelope(-PI / 2.0, 1e-9).unwrap();
        assert!((e.lower - 1.0).abs() < 1e-12 && (e.upper - 1.0).abs() < 1e-12);
        let e = kappa_envelope(-PI / 2.0, PI / 8.0).unwrap();
        assert!((e.lower - (PI / 8.0).cos()).abs() < 1e-15);
        assert!((e.upper - 1.0).abs() < 1e-15);
        assert!(kappa_envelope(-PI / 2.0, 1.0).is_err());
        assert!(kappa_envelope(-PI / 2.0, 0.0).is_err());
        for b in [-2.5, -1.0, -0.3] {
            let lim = 0.5 * (PI + b).min(-b);
            let e = kappa_envelope(b, lim).unwrap();
            assert!(e.lower <= -b.sin() && -b.sin() <= e.upper);
        }
    }

    #[test]
    fn nonneg_time_examples() {
        assert!((kappa_nonneg_time(1.0, 1.0, -1.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        let t1 = kappa_nonneg_time(0.5, 0.7, -0.3).unwrap();
        let t2 = kappa_nonneg_time(1.0, 0.7, -0.3).unwrap();
        assert!((t1 - 2.0 * t2).abs() < 1e-14);
        assert!(kappa_nonneg_time(1.0, 0.7, -1e-12).unwrap() < 1e-11);
        assert!(kappa_nonneg_time(1.0, 0.7, 0.1).is_err());
        assert!(kappa_nonneg_time(0.0, 0.7, -0.1).is_err());
    }

    #[test]
    fn critical_diameter_basics() {
        let r = critical_diameter(-PI / 2.0, 1.0, -0.3, DEFAULT_DBAR_GRID).unwrap();
        assert!(r.d_bar > 0.0 && r.d_bar <= PI / 2.0);
        assert!((r.grid_resolution - (PI / 2.0) / 9999.0).abs() < 1e-15);
        assert_eq!(r.d_bar, r.argmax_index as f64 * r.grid_resolution);
        assert!(critical_diameter(-1.0, 1.0, -0.3, 999).is_err());
        assert!(critical_diameter(-1.0, 0.0, -0.3, 1000).is_err());
        assert!(critical_diameter(-1.0, 1.0, 0.1, 1000).is_err());

        // small epsilon: the linear objective underflows but the argmax survives
        let r = critical_diameter(-PI / 2.0, 1e-6, -0.3, DEFAULT_DBAR_GRID).unwrap();
        assert!(r.d_bar > 0.0 && r.objective_at_max == 0.0);
        assert!(r.log_objective_at_max.is_finite());
    }

    #[test]
    fn sweep_single_cell_is_critical_diameter() {
        let t = sweep_critical_diameter(&[-1.0], &[0.7], &[-0.2], 2000).unwrap();
        let r = critical_diameter(-1.0, 0.7, -0.2, 2000).unwrap();
        assert_eq!(t.values, vec![r.d_bar]);
        assert_eq!(t.rows().next().unwrap(), [-1.0, 0.7, -0.2, r.d_bar]);
    }

    #[test]
    fn theorem2_precondition_errors() {
        let p = ModelParams::new(0.0, 0.0, -PI / 2.0, 1.0).unwrap();
        let mut k = SquareMatrix::from_fn(3, |_, _| 0.5);
        k.set(0, 1, -0.3);
        let cfg = IntegratorConfig::default();
        let wide = st(&[0.0, 2.0, 1.0], k.clone());
        assert!(matches!(
            verify_theorem2(&wide, &p, &cfg, 2000),
            Err(Error::Precondition(_))
        ));
        let frozen = ModelParams::new(0.0, 0.0, -PI / 2.0, 0.0).unwrap();
        assert!(verify_theorem2(&st(&[0.0, 0.01, 0.0], k), &frozen, &cfg, 2000).is_err());
    }
}
