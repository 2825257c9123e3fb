//! Self-check suites: closed forms against the numeric oracle, and the
//! invariant-set and convergence results against simulation.
//!
//! Every suite is seeded and runs its trials in parallel while reporting
//! them in a fixed order, so reports are reproducible.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basins::{
    check_invariance, critical_diameter, delta_star, diameter_bound, f_gauge, verify_theorem2,
    DEFAULT_DBAR_GRID,
};
use crate::dynamics::{integrate, rhs_static, IntegratorConfig, SystemState};
use crate::error::{Error, Result};
use crate::io::{report_line, trajectory_csv};
use crate::linalg::{multiset_distance, SquareMatrix};
use crate::model::{
    build_band_network, build_block_network, BandNetworkSpec, BlockNetworkSpec, ModelParams,
    PhaseClass, PhaseState,
};
use crate::sampling::{
    sample_invariance_trial, sample_thm1_data, sample_thm2_data, seeded, SeededRng,
};
use crate::spectral::{
    admissible_p, antipodal_matrix_a, antipodal_spectrum, complete_sync_spectrum, numeric_spectrum,
    rotating_wave_eigenvalues, rotating_wave_jacobian, stability_verdict, sync_stability_region,
    StabilityVerdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    SpectralOracle,
    Invariance,
    Theorem1,
    Theorem2,
    Properties,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::SpectralOracle,
        Suite::Invariance,
        Suite::Theorem1,
        Suite::Theorem2,
        Suite::Properties,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::SpectralOracle => "spectral-oracle",
            Suite::Invariance => "invariance",
            Suite::Theorem1 => "theorem1",
            Suite::Theorem2 => "theorem2",
            Suite::Properties => "properties",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::invalid("suite", format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub time: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: impl Into<String>, passed: bool, time: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            time,
            detail: detail.into(),
        }
    }

    pub fn line(&self) -> String {
        let mut s = report_line(self.passed, &self.name, self.time);
        if !self.detail.is_empty() {
            s.push_str("  # ");
            s.push_str(&self.detail);
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> usize {
        self.checks.iter().filter(|c| !c.passed).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&c.line());
            out.push('\n');
        }
        out
    }
}

pub const DEFAULT_SEED: u64 = 20_240_917;

pub fn run_suite(suite: Suite, seed: u64) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::SpectralOracle => spectral_oracle_suite(seed)?,
        Suite::Invariance => invariance_suite(seed)?,
        Suite::Theorem1 => theorem1_suite(seed)?,
        Suite::Theorem2 => theorem2_suite(seed)?,
        Suite::Properties => properties_suite(seed)?,
    };
    Ok(SuiteReport {
        suite: suite.name().to_string(),
        checks,
    })
}

/// Independent per-trial generators derived from one seed.
fn trial_rngs(seed: u64, count: usize) -> Vec<SeededRng> {
    (0..count)
        .map(|i| {
            seeded(
                seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
                    .wrapping_add(i as u64),
            )
        })
        .collect()
}

/// Random block spec with `M ≤ max_groups`, `N ≤ max_n`, weights in `[−3, 3]`,
/// and a class assignment that uses both classes whenever `M ≥ 2`.
pub fn random_block_spec(rng: &mut impl Rng, max_groups: usize, max_n: usize) -> BlockNetworkSpec {
    let m = rng.random_range(1..=max_groups);
    let cap = (max_n / m).max(1);
    let sizes: Vec<usize> = (0..m).map(|_| rng.random_range(1..=cap)).collect();
    let a = rng.random_range(-3.0..=3.0);
    let b = rng.random_range(-3.0..=3.0);
    let mut classes: Vec<PhaseClass> = (0..m)
        .map(|_| {
            if rng.random_bool(0.5) {
                PhaseClass::Pi
            } else {
                PhaseClass::Zero
            }
        })
        .collect();
    if m >= 2 && classes.iter().all(|&c| c == classes[0]) {
        let k = rng.random_range(0..m);
        classes[k] = if classes[0] == PhaseClass::Zero {
            PhaseClass::Pi
        } else {
            PhaseClass::Zero
        };
    }
    BlockNetworkSpec::new(sizes, a, b)
        .and_then(|s| s.with_classes(classes))
        .expect("drawn in range")
}

/// Largest closed-form vs numeric deviation for complete sync and antipodal states.
pub fn block_oracle_deviation(spec: &BlockNetworkSpec) -> Result<(f64, f64)> {
    let sync = complete_sync_spectrum(spec)?;
    let num = numeric_spectrum(&build_block_network(spec).laplacian())?;
    let anti = antipodal_spectrum(spec)?;
    let num_anti = numeric_spectrum(&antipodal_matrix_a(spec)?.laplacian())?;
    Ok((
        multiset_distance(&sync.values(), &num),
        multiset_distance(&anti.values(), &num_anti),
    ))
}

/// Largest deviation between `λ_k` and `N` times the Jacobian eigenvalues.
pub fn circulant_oracle_deviation(spec: &BandNetworkSpec, m: usize) -> Result<f64> {
    let closed = rotating_wave_eigenvalues(spec, m)?;
    let nf = spec.n as f64;
    let num: Vec<f64> = numeric_spectrum(&rotating_wave_jacobian(spec, m)?)?
        .into_iter()
        .map(|v| v * nf)
        .collect();
    Ok(multiset_distance(&closed, &num))
}

/// Every `(N, W, m, p)` of the exhaustive circulant sweep.
pub fn circulant_cases(
    ns: std::ops::RangeInclusive<usize>,
    ps: &[f64],
) -> Vec<(usize, usize, usize, f64)> {
    let mut cases = Vec::new();
    for n in ns {
        for w in 1..=BandNetworkSpec::max_bandwidth(n) {
            for m in 0..n {
                for &p in ps {
                    cases.push((n, w, m, p));
                }
            }
        }
    }
    cases
}

fn max_lambda(n: usize, w: usize, m: usize, p: f64) -> f64 {
    rotating_wave_eigenvalues(&BandNetworkSpec { n, w, p }, m)
        .expect("validated case")
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Checks that the bounds of the admissible range are where `max_k λ_k` crosses 0.
pub fn admissible_boundary_consistent(n: usize, w: usize, m: usize) -> Result<bool> {
    const H: f64 = 1e-6;
    const TOL: f64 = 1e-9;
    let range = admissible_p(n, w, m)?;
    let mut ok = true;
    if let Some(lo) = range.lower().filter(|&lo| lo > 0.0) {
        let inside = range
            .upper()
            .map_or(lo + H, |hi| (lo + H).min(0.5 * (lo + hi)));
        ok &= max_lambda(n, w, m, inside) <= TOL;
        if lo - H > 0.0 {
            ok &= max_lambda(n, w, m, lo - H) > 0.0;
        }
    }
    if let Some(hi) = range.upper() {
        let inside = range
            .lower()
            .map_or(hi - H, |lo| (hi - H).max(0.5 * (lo + hi)));
        if inside > 0.0 {
            ok &= max_lambda(n, w, m, inside) <= TOL;
        }
        ok &= max_lambda(n, w, m, hi + H) > 0.0;
    }
    Ok(ok)
}

/// Jacobian-sign verdict for complete sync from the numeric Laplacian spectrum.
pub fn numeric_sync_verdict(spec: &BlockNetworkSpec, tol: f64) -> Result<StabilityVerdict> {
    let n = spec.n() as f64;
    let jac: Vec<f64> = numeric_spectrum(&build_block_network(spec).laplacian())?
        .into_iter()
        .map(|v| -v / n)
        .collect();
    stability_verdict(&jac, tol)
}

fn spectral_oracle_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut checks = Vec::new();

    let specs: Vec<BlockNetworkSpec> = trial_rngs(seed, 200)
        .into_iter()
        .map(|mut rng| random_block_spec(&mut rng, 5, 40))
        .collect();
    let devs = specs
        .par_iter()
        .map(block_oracle_deviation)
        .collect::<Result<Vec<_>>>()?;
    let sync_dev = devs.iter().map(|d| d.0).fold(0.0, f64::max);
    let anti_dev = devs.iter().map(|d| d.1).fold(0.0, f64::max);
    checks.push(CheckResult::new(
        "block_sync_oracle",
        sync_dev <= 1e-8,
        0.0,
        format!("200 specs, max deviation {sync_dev:.3e}"),
    ));
    checks.push(CheckResult::new(
        "block_antipodal_oracle",
        anti_dev <= 1e-8,
        0.0,
        format!("200 specs, max deviation {anti_dev:.3e}"),
    ));

    let unstable_ok = specs
        .iter()
        .filter(|s| s.b < 0.0 && s.groups() >= 2)
        .map(|s| {
            let n = s.n() as f64;
            let jac: Vec<f64> = complete_sync_spectrum(s)?
                .values()
                .into_iter()
                .map(|v| -v / n)
                .collect();
            Ok(matches!(
                stability_verdict(&jac, 1e-9)?,
                StabilityVerdict::Unstable(_)
            ))
        })
        .collect::<Result<Vec<bool>>>()?;
    checks.push(CheckResult::new(
        "sync_unstable_for_negative_b",
        unstable_ok.iter().all(|&x| x),
        0.0,
        format!("{} specs with b < 0 and M >= 2", unstable_ok.len()),
    ));

    let cases = circulant_cases(5..=32, &[0.1, 1.0, 10.0]);
    let circ = cases
        .par_iter()
        .map(|&(n, w, m, p)| circulant_oracle_deviation(&BandNetworkSpec { n, w, p }, m))
        .collect::<Result<Vec<f64>>>()?;
    let circ_dev = circ.iter().copied().fold(0.0, f64::max);
    checks.push(CheckResult::new(
        "circulant_oracle",
        circ_dev <= 1e-8,
        0.0,
        format!("{} cases, max deviation {circ_dev:.3e}", cases.len()),
    ));

    let bounds: Vec<(usize, usize, usize)> = circulant_cases(5..=32, &[1.0])
        .into_iter()
        .map(|(n, w, m, _)| (n, w, m))
        .collect();
    let bad = bounds
        .par_iter()
        .map(|&(n, w, m)| admissible_boundary_consistent(n, w, m).map(|ok| (!ok) as usize))
        .collect::<Result<Vec<usize>>>()?
        .into_iter()
        .sum::<usize>();
    checks.push(CheckResult::new(
        "admissible_boundary_consistency",
        bad == 0,
        0.0,
        format!("{} (N, W, m) cases, {bad} inconsistent", bounds.len()),
    ));

    // stability region for a < 0 < b against the numeric spectrum
    let region: Vec<(bool, bool)> = trial_rngs(seed ^ 0x5151, 400)
        .into_par_iter()
        .map(|mut rng| {
            let mut spec = random_block_spec(&mut rng, 5, 40);
            spec.a = -rng.random_range(0.01..3.0);
            spec.b = rng.random_range(0.01..3.0);
            let analytic = sync_stability_region(spec.a, spec.b, &spec.group_sizes, 1e-9);
            let numeric = numeric_sync_verdict(&spec, 1e-9)?;
            let marginal = matches!(analytic, StabilityVerdict::Marginal(_));
            Ok((marginal, same_sign(analytic, numeric)))
        })
        .collect::<Result<Vec<_>>>()?;
    let decided = region.iter().filter(|r| !r.0).count();
    let agree = region.iter().filter(|r| !r.0 && r.1).count();
    checks.push(CheckResult::new(
        "sync_boundary_region",
        agree == decided,
        0.0,
        format!("{agree}/{decided} non-marginal specs agree"),
    ));
    Ok(checks)
}

/// Whether two verdicts agree on stable versus unstable.
pub fn same_sign(x: StabilityVerdict, y: StabilityVerdict) -> bool {
    matches!(
        (x, y),
        (StabilityVerdict::Stable, StabilityVerdict::Stable)
            | (StabilityVerdict::Unstable(_), StabilityVerdict::Unstable(_))
            | (StabilityVerdict::Marginal(_), StabilityVerdict::Marginal(_))
    )
}

fn invariance_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let cfg = IntegratorConfig::new(1e-2, 50.0, 1)?;
    trial_rngs(seed, 100)
        .into_par_iter()
        .enumerate()
        .map(|(i, mut rng)| {
            let trial = sample_invariance_trial(&mut rng, 12, &[0.1, 1.0]);
            let out = check_invariance(&trial.state, &trial.set, &trial.params, &cfg, 1e-6, 1e-3)?;
            let (passed, time, detail) = match (&out.first_violation, out.attracted) {
                (Some((t, what)), _) => (false, *t, what.clone()),
                (None, false) => (
                    false,
                    cfg.t_end,
                    format!(
                        "min intra kappa {:.6} below delta* {:.6}",
                        out.final_min_intra, out.delta_star
                    ),
                ),
                (None, true) => (
                    true,
                    cfg.t_end,
                    format!("N={} eps={}", trial.state.n(), trial.params.epsilon),
                ),
            };
            Ok(CheckResult::new(
                format!("invariance_trial_{i}"),
                passed,
                time,
                detail,
            ))
        })
        .collect()
}

/// One positive-coupling convergence run: diameter under the analytic bound at
/// every sample and couplings within `1e-3` of `−sin β` at the end.
pub fn theorem1_trial(rng: &mut impl Rng) -> Result<(bool, f64, String)> {
    let beta = -PI * rng.random_range(0.25..0.5);
    let epsilon = rng.random_range(0.2..=2.0);
    let state = sample_thm1_data(rng, 10, beta);
    let params = ModelParams::new(0.0, 0.0, beta, epsilon)?;
    let d0 = crate::model::phase_diameter(state.theta.as_slice());
    if !crate::basins::check_thm1_conditions(&state, beta, false) {
        return Ok((false, 0.0, "sampled data violates the hypotheses".into()));
    }
    let cfg = IntegratorConfig::new(1e-2, 100.0, 1)?;
    let traj = integrate(&state, &params, &cfg)?;
    for (s, d) in traj.samples.iter().zip(&traj.diagnostics) {
        let bound = diameter_bound(s.time, d0, beta);
        if d.diameter > bound + 1e-6 {
            return Ok((
                false,
                s.time,
                format!("diameter {:.9} above bound {bound:.9}", d.diameter),
            ));
        }
    }
    let last = traj.last().expect("nonempty");
    let dev = last
        .kappa
        .as_slice()
        .iter()
        .map(|k| (k + beta.sin()).abs())
        .fold(0.0, f64::max);
    Ok((
        dev < 1e-3,
        last.time,
        format!("beta={beta:.4} eps={epsilon:.3} D0={d0:.4} final kappa dev {dev:.3e}"),
    ))
}

fn theorem1_suite(seed: u64) -> Result<Vec<CheckResult>> {
    trial_rngs(seed, 50)
        .into_par_iter()
        .enumerate()
        .map(|(i, mut rng)| {
            let (passed, t, detail) = theorem1_trial(&mut rng)?;
            Ok(CheckResult::new(
                format!("theorem1_trial_{i}"),
                passed,
                t,
                detail,
            ))
        })
        .collect()
}

/// One adaptive convergence run from `D⁰ = 0.9·D̄`.
pub fn theorem2_trial(rng: &mut impl Rng) -> Result<crate::basins::Theorem2Report> {
    let beta = -PI * rng.random_range(0.25..=0.75);
    let epsilon = rng.random_range(0.5..=2.0);
    let kappa_min = rng.random_range(-0.5..=-0.1);
    let d_bar = critical_diameter(beta, epsilon, kappa_min, DEFAULT_DBAR_GRID)?.d_bar;
    let state = sample_thm2_data(rng, 10, 0.9 * d_bar, kappa_min);
    let params = ModelParams::new(0.0, 0.0, beta, epsilon)?;
    let cfg = IntegratorConfig::new(1e-2, 100.0, 1)?;
    verify_theorem2(&state, &params, &cfg, DEFAULT_DBAR_GRID)
}

fn theorem2_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let reports = trial_rngs(seed, 20)
        .into_par_iter()
        .map(|mut rng| theorem2_trial(&mut rng))
        .collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    for (i, r) in reports.iter().enumerate() {
        for a in &r.assertions {
            checks.push(CheckResult::new(
                format!("theorem2_trial_{i}_{}", a.name),
                a.passed,
                a.time,
                a.detail.clone(),
            ));
        }
        let first = r.first_nonneg_time.unwrap_or(f64::INFINITY);
        checks.push(CheckResult::new(
            format!("theorem2_trial_{i}_first_nonneg_before_T"),
            first <= r.nonneg_time + 1e-2,
            first,
            format!("T = {:.6}", r.nonneg_time),
        ));
    }
    Ok(checks)
}

/// The `(β, ε, κ_min⁰)` grid of the critical-diameter property checks.
pub fn dbar_property_axes() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let betas = vec![-0.75 * PI, -0.625 * PI, -0.375 * PI, -0.25 * PI];
    let (lo, hi) = (1e-4f64.ln(), 2f64.ln());
    let epsilons = (0..20)
        .map(|i| (lo + (hi - lo) * i as f64 / 19.0).exp())
        .collect();
    let kappas = (0..20).map(|i| -0.1 - 0.6 * i as f64 / 19.0).collect();
    (betas, epsilons, kappas)
}

/// Monotonicity, symmetry and small-`ε` checks on a critical-diameter sweep.
pub fn dbar_property_checks(table: &crate::basins::SweepTable) -> Vec<CheckResult> {
    let (nb, ne, nk) = (table.betas.len(), table.epsilons.len(), table.kappas.len());
    let mut eps_bad = 0;
    let mut kappa_bad = 0;
    for ib in 0..nb {
        for ie in 0..ne {
            for ik in 0..nk {
                if ie + 1 < ne && table.get(ib, ie + 1, ik) < table.get(ib, ie, ik) {
                    eps_bad += 1;
                }
                if ik + 1 < nk && table.get(ib, ie, ik + 1) > table.get(ib, ie, ik) {
                    kappa_bad += 1;
                }
            }
        }
    }
    let mut sym_dev = 0.0f64;
    for ib in 0..nb {
        let mirror = -PI - table.betas[ib];
        if let Some(jb) = table.betas.iter().position(|&b| (b - mirror).abs() < 1e-12) {
            for ie in 0..ne {
                for ik in 0..nk {
                    sym_dev = sym_dev.max((table.get(ib, ie, ik) - table.get(jb, ie, ik)).abs());
                }
            }
        }
    }
    let ie_min = (0..ne)
        .min_by(|&x, &y| table.epsilons[x].total_cmp(&table.epsilons[y]))
        .expect("nonempty axis");
    let mut small_eps_max = 0.0f64;
    for ib in 0..nb {
        for ik in 0..nk {
            if table.kappas[ik] <= -0.1 {
                small_eps_max = small_eps_max.max(table.get(ib, ie_min, ik));
            }
        }
    }
    vec![
        CheckResult::new(
            "dbar_nondecreasing_in_epsilon",
            eps_bad == 0,
            0.0,
            format!("{eps_bad} violations"),
        ),
        CheckResult::new(
            "dbar_nonincreasing_in_abs_kappa",
            kappa_bad == 0,
            0.0,
            format!("{kappa_bad} violations"),
        ),
        CheckResult::new(
            "dbar_beta_mirror_symmetry",
            sym_dev <= 1e-9,
            0.0,
            format!("max deviation {sym_dev:.3e}"),
        ),
        CheckResult::new(
            "dbar_vanishes_as_epsilon_to_zero",
            small_eps_max < 1e-2,
            0.0,
            format!(
                "max dbar at eps={:.1e} is {small_eps_max:.4e}",
                table.epsilons[ie_min]
            ),
        ),
    ]
}

/// Endpoint error ratio `err(h)/err(h/2)` against an `h/64` reference.
pub fn rk4_order_ratio(
    state: &SystemState,
    params: &ModelParams,
    t_end: f64,
    h: f64,
) -> Result<f64> {
    let end = |step: f64| -> Result<Vec<f64>> {
        let cfg = IntegratorConfig::new(step, t_end, usize::MAX)?;
        let traj = integrate(state, params, &cfg)?;
        let last = traj.last().expect("nonempty");
        Ok(last
            .theta
            .as_slice()
            .iter()
            .chain(last.kappa.as_slice())
            .copied()
            .collect())
    };
    let reference = end(h / 64.0)?;
    let err = |v: &[f64]| {
        v.iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    };
    Ok(err(&end(h)?) / err(&end(h / 2.0)?))
}

/// Largest drift of the mean phase over a static symmetric `α = 0` run.
pub fn mean_phase_drift(state: &SystemState, t_end: f64) -> Result<f64> {
    let params = ModelParams::new(0.0, 0.0, -PI / 2.0, 0.0)?;
    let traj = integrate(state, &params, &IntegratorConfig::new(1e-2, t_end, 1)?)?;
    let mean = |s: &SystemState| s.theta.as_slice().iter().sum::<f64>() / s.n() as f64;
    let m0 = mean(&traj.samples[0]);
    Ok(traj
        .samples
        .iter()
        .map(|s| (mean(s) - m0).abs())
        .fold(0.0, f64::max))
}

fn random_state(rng: &mut impl Rng, n: usize, symmetric: bool) -> SystemState {
    let theta: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
    let mut kappa = SquareMatrix::from_fn(n, |_, _| rng.random_range(-1.0..=1.0));
    if symmetric {
        kappa = SquareMatrix::from_fn(n, |i, j| kappa.get(i.min(j), i.max(j)));
    }
    SystemState {
        theta: PhaseState::new(theta).expect("finite"),
        kappa,
        time: 0.0,
    }
}

fn properties_suite(seed: u64) -> Result<Vec<CheckResult>> {
    let mut checks = Vec::new();
    let mut rng = seeded(seed);

    let (betas, epsilons, kappas) = dbar_property_axes();
    let table =
        crate::basins::sweep_critical_diameter(&betas, &epsilons, &kappas, DEFAULT_DBAR_GRID)?;
    checks.extend(dbar_property_checks(&table));

    // panel means across beta for the contour panels
    let panel_mean = |beta: f64| -> Result<f64> {
        let t =
            crate::basins::sweep_critical_diameter(&[beta], &epsilons, &kappas, DEFAULT_DBAR_GRID)?;
        Ok(t.values.iter().sum::<f64>() / t.values.len() as f64)
    };
    let means = [
        panel_mean(-0.5 * PI)?,
        panel_mean(-0.375 * PI)?,
        panel_mean(-0.25 * PI)?,
    ];
    checks.push(CheckResult::new(
        "dbar_panels_decrease_toward_zero_beta",
        means[0] > means[1] && means[1] > means[2],
        0.0,
        format!(
            "panel means {:.4} {:.4} {:.4}",
            means[0], means[1], means[2]
        ),
    ));

    let state = random_state(&mut rng, 6, false);
    let params = ModelParams::new(0.3, 0.2, -1.1, 0.8)?;
    let ratio = rk4_order_ratio(&state, &params, 5.0, 0.1)?;
    checks.push(CheckResult::new(
        "rk4_order_ratio",
        (12.0..=20.0).contains(&ratio),
        5.0,
        format!("ratio {ratio:.3}"),
    ));

    let sym = random_state(&mut rng, 8, true);
    let drift = mean_phase_drift(&sym, 50.0)?;
    checks.push(CheckResult::new(
        "mean_phase_conservation",
        drift <= 1e-10,
        50.0,
        format!("max drift {drift:.3e}"),
    ));

    let cfg = IntegratorConfig::new(1e-2, 10.0, 5)?;
    let a = trajectory_csv(&integrate(&state, &params, &cfg)?);
    let b = trajectory_csv(&integrate(&state, &params, &cfg)?);
    checks.push(CheckResult::new("integrator_determinism", a == b, 10.0, ""));

    // rotational equivariance
    let c = 0.731;
    let shifted = SystemState {
        theta: state.theta.shifted(c),
        ..state.clone()
    };
    let p0 = ModelParams {
        omega: 0.0,
        ..params
    };
    let t1 = integrate(&state, &p0, &cfg)?;
    let t2 = integrate(&shifted, &p0, &cfg)?;
    let mut equiv = 0.0f64;
    for (x, y) in t1.samples.iter().zip(&t2.samples) {
        for (u, v) in x.theta.as_slice().iter().zip(y.theta.as_slice()) {
            equiv = equiv.max((v - u - c).abs());
        }
        equiv = equiv.max(x.kappa.max_abs_diff(&y.kappa));
    }
    checks.push(CheckResult::new(
        "rotational_equivariance",
        equiv <= 1e-9,
        10.0,
        format!("max deviation {equiv:.3e}"),
    ));

    // the coupling box [-1, 1] is forward invariant
    let boxed = random_state(&mut rng, 7, false);
    let traj = integrate(
        &boxed,
        &ModelParams::new(0.0, 0.4, -2.0, 1.5)?,
        &IntegratorConfig::new(1e-2, 30.0, 1)?,
    )?;
    let worst = traj
        .diagnostics
        .iter()
        .map(|d| d.kmax.max(-d.kmin))
        .fold(0.0, f64::max);
    checks.push(CheckResult::new(
        "kappa_box_invariance",
        worst <= 1.0 + 1e-9,
        30.0,
        format!("max |kappa| {worst:.12}"),
    ));

    let spec = BandNetworkSpec::new(24, 4, 0.6)?;
    let k = build_band_network(&spec);
    let mut residual = 0.0f64;
    for m in 0..24 {
        let d = rhs_static(
            &PhaseState::rotating_wave(24, m),
            &k,
            &ModelParams::frozen(0.0, -1.0),
        )?;
        let mean = d.iter().sum::<f64>() / d.len() as f64;
        residual = residual.max(d.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max));
    }
    checks.push(CheckResult::new(
        "rotating_wave_equilibrium_residual",
        residual < 1e-12,
        0.0,
        format!("max residual {residual:.3e}"),
    ));

    let mut gauge_dev = 0.0f64;
    for i in 1..=10_000 {
        let x = PI * i as f64 / 10_001.0;
        gauge_dev = gauge_dev.max((f_gauge(x)? - (x / 2.0).tan()).abs());
    }
    checks.push(CheckResult::new(
        "gauge_equals_half_angle_tangent",
        gauge_dev <= 1e-12,
        0.0,
        format!("max deviation {gauge_dev:.3e}"),
    ));

    let mut monotone = true;
    for ib in 1..40 {
        let beta = -PI * ib as f64 / 40.0;
        let mut prev = f64::INFINITY;
        for ic in 0..200 {
            let v = delta_star(beta, (PI / 2.0) * ic as f64 / 200.0)?;
            monotone &= v <= prev + 1e-15;
            prev = v;
        }
    }
    checks.push(CheckResult::new(
        "delta_star_nonincreasing_in_c",
        monotone,
        0.0,
        "",
    ));
    Ok(checks)
}
