//! Pinned experiment recipes that regenerate each figure's data in one command.
//!
//! Every recipe has a settings struct whose defaults fully determine the run;
//! `--override` merges a partial JSON object into those defaults and the
//! resolved settings are written to `recipe.json`.

use std::f64::consts::PI;
use std::path::Path;

use kuramoto_signed::io::{fmt_num, trajectory_csv};
use kuramoto_signed::sampling::{sample_thm1_data, seeded};
use kuramoto_signed::verify::{run_suite, Suite, DEFAULT_SEED};
use kuramoto_signed::{
    build_block_network, check_thm1_conditions, detect_sync, diameter_bound, integrate,
    numeric_spectrum, phase_diameter, sweep_critical_diameter, sync_stability_region,
    BlockNetworkSpec, IntegratorConfig, ModelParams, StabilityVerdict, SyncKind,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::commands::{admissible, geomspace, linspace, sweep_dbar, SweepGrid, MAX_PANEL_CELLS};
use crate::failure::{CliResult, Failure};
use crate::output::{Output, Plot};

pub const RECIPES: [&str; 6] = ["fig3", "fig4", "fig5", "fig6", "fig7", "verify-all"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig3Settings {
    pub a_range: [f64; 2],
    pub b_range: [f64; 2],
    pub points: usize,
    pub group_sizes: Vec<Vec<usize>>,
    pub tol: f64,
}

impl Default for Fig3Settings {
    fn default() -> Self {
        Self {
            a_range: [-3.0, 3.0],
            b_range: [-3.0, 3.0],
            points: 61,
            group_sizes: vec![vec![10, 5, 3, 2], vec![5, 5, 5, 5]],
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig4Settings {
    pub n: usize,
    pub ms: Vec<usize>,
    pub w_min: usize,
    pub w_max: Option<usize>,
}

impl Default for Fig4Settings {
    fn default() -> Self {
        Self {
            n: 100,
            ms: vec![0, 1, 2, 4],
            w_min: 1,
            w_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig5Settings {
    pub n: usize,
    pub beta: f64,
    pub epsilon: f64,
    pub integrator: IntegratorConfig,
    pub seed: u64,
    /// Accept `min(π + β, |β|) = π/2`, which the strict hypothesis excludes.
    pub allow_boundary: bool,
}

impl Default for Fig5Settings {
    fn default() -> Self {
        Self {
            n: 10,
            beta: -PI / 2.0,
            epsilon: 1.0,
            integrator: IntegratorConfig {
                step: 1e-2,
                t_end: 100.0,
                sample_every: 10,
            },
            seed: 5,
            allow_boundary: true,
        }
    }
}

fn fig6_default() -> SweepGrid {
    SweepGrid {
        betas: vec![-0.25 * PI, -0.375 * PI, -0.5 * PI, -0.625 * PI, -0.75 * PI],
        eps_min: 1e-2,
        eps_max: 2.0,
        eps_count: 40,
        kappa_min: -0.05,
        kappa_max: -1.0,
        kappa_count: 40,
        grid_points: 10_000,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Fig7Settings {
    /// One panel per initial coupling floor, least negative first.
    pub kappas: Vec<f64>,
    pub beta_range: [f64; 2],
    pub beta_count: usize,
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_count: usize,
    pub grid_points: usize,
}

impl Default for Fig7Settings {
    fn default() -> Self {
        Self {
            kappas: vec![-0.1, -0.7],
            beta_range: [-0.95 * PI, -0.05 * PI],
            beta_count: 40,
            eps_min: 1e-2,
            eps_max: 2.0,
            eps_count: 40,
            grid_points: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyAllSettings {
    pub seed: u64,
}

impl Default for VerifyAllSettings {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED }
    }
}

/// Recursive JSON merge: objects merge key by key, anything else replaces.
pub fn merge(base: &mut Value, patch: &Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge(b.entry(k.clone()).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p.clone(),
    }
}

pub fn resolve<T: Serialize + DeserializeOwned>(
    defaults: T,
    overrides: Option<&str>,
) -> CliResult<T> {
    let Some(text) = overrides else {
        return Ok(defaults);
    };
    let patch: Value = serde_json::from_str(text)
        .map_err(|e| Failure::usage(format!("malformed --override: {e}")))?;
    if !patch.is_object() {
        return Err(Failure::usage("--override must be a JSON object"));
    }
    let mut value = serde_json::to_value(defaults).expect("settings serialize");
    merge(&mut value, &patch);
    serde_json::from_value(value).map_err(|e| Failure::usage(format!("bad --override: {e}")))
}

pub fn run(name: &str, overrides: Option<&str>, out: &Output) -> CliResult<()> {
    let dir = out.sub(Path::new(name))?;
    match name {
        "fig3" => fig3(
            &record(&dir, resolve(Fig3Settings::default(), overrides)?)?,
            &dir,
        ),
        "fig4" => fig4(
            &record(&dir, resolve(Fig4Settings::default(), overrides)?)?,
            &dir,
        ),
        "fig5" => fig5(
            &record(&dir, resolve(Fig5Settings::default(), overrides)?)?,
            &dir,
        ),
        "fig6" => {
            let grid = record(&dir, resolve(fig6_default(), overrides)?)?;
            sweep_dbar(&grid, &dir, "fig6_panel").map(|_| ())
        }
        "fig7" => fig7(
            &record(&dir, resolve(Fig7Settings::default(), overrides)?)?,
            &dir,
        ),
        "verify-all" => verify_all(
            &record(&dir, resolve(VerifyAllSettings::default(), overrides)?)?,
            &dir,
        ),
        _ => Err(Failure::usage(format!(
            "unknown recipe {name:?}; expected one of {}",
            RECIPES.join(", ")
        ))),
    }
}

fn record<T: Serialize>(dir: &Output, settings: T) -> CliResult<T> {
    dir.write(
        "recipe.json",
        &serde_json::to_string_pretty(&settings).expect("settings serialize"),
    )?;
    Ok(settings)
}

fn verdict_name(v: StabilityVerdict) -> &'static str {
    match v {
        StabilityVerdict::Stable => "stable",
        StabilityVerdict::Unstable(_) => "unstable",
        StabilityVerdict::Marginal(_) => "marginal",
    }
}

/// Complete-sync stability over the `(a, b)` plane, analytic against numeric.
fn fig3(s: &Fig3Settings, out: &Output) -> CliResult<()> {
    if s.points < 2 || s.group_sizes.is_empty() {
        return Err(Failure::usage(
            "fig3 needs at least 2 points and one group structure",
        ));
    }
    let a_axis = linspace(s.a_range[0], s.a_range[1], s.points);
    let b_axis = linspace(s.b_range[0], s.b_range[1], s.points);
    let mut disagreements = 0;
    for (idx, sizes) in s.group_sizes.iter().enumerate() {
        BlockNetworkSpec::new(sizes.clone(), 1.0, 1.0)?;
        let n: usize = sizes.iter().sum();
        let frac = *sizes.iter().max().expect("nonempty") as f64 / n as f64;
        let mut csv = String::from("a,b,max_group_fraction,threshold,analytic,numeric_top\n");
        for &a in &a_axis {
            for &b in &b_axis {
                let spec = BlockNetworkSpec::new(sizes.clone(), a, b)?;
                let analytic = sync_stability_region(a, b, sizes, s.tol);
                let mut jac: Vec<f64> = numeric_spectrum(&build_block_network(&spec).laplacian())?
                    .into_iter()
                    .map(|v| -v / n as f64)
                    .collect();
                let zero = jac
                    .iter()
                    .enumerate()
                    .min_by(|x, y| x.1.abs().total_cmp(&y.1.abs()))
                    .map(|(i, _)| i)
                    .expect("nonempty spectrum");
                jac.remove(zero);
                let top = jac.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if top.abs() > 1e-6 {
                    let agree = match analytic {
                        StabilityVerdict::Stable => top < 0.0,
                        StabilityVerdict::Unstable(_) => top > 0.0,
                        StabilityVerdict::Marginal(_) => false,
                    };
                    disagreements += usize::from(!agree);
                }
                let threshold = if a < 0.0 && b > 0.0 {
                    fmt_num(b / (b - a))
                } else {
                    String::new()
                };
                csv.push_str(&format!(
                    "{},{},{},{threshold},{},{}\n",
                    fmt_num(a),
                    fmt_num(b),
                    fmt_num(frac),
                    verdict_name(analytic),
                    fmt_num(if top.is_finite() { top } else { 0.0 })
                ));
            }
        }
        out.write_csv(
            &format!("fig3_{idx}.csv"),
            &csv,
            &Plot::Surface {
                x: 1,
                y: 2,
                z: 6,
                xlabel: "a".into(),
                ylabel: "b".into(),
                logx: false,
            },
        )?;
    }
    println!(
        "fig3: {} structures on a {points}x{points} grid, {disagreements} disagreements -> {}",
        s.group_sizes.len(),
        out.dir().display(),
        points = s.points,
    );
    if disagreements > 0 {
        return Err(Failure::Assertion(format!(
            "{disagreements} non-marginal cells disagree with the numeric spectrum"
        )));
    }
    Ok(())
}

fn fig4(s: &Fig4Settings, out: &Output) -> CliResult<()> {
    admissible(s.n, &s.ms, s.w_min, s.w_max, out, "fig4.csv").map(|_| ())
}

/// A positive-coupling run with the diameter envelope alongside.
fn fig5(s: &Fig5Settings, out: &Output) -> CliResult<()> {
    if s.n < 2 {
        return Err(Failure::usage("fig5 needs n >= 2"));
    }
    let params = ModelParams::new(0.0, 0.0, s.beta, s.epsilon)?;
    params.require_negative_beta()?;
    s.integrator.validate()?;
    let state = sample_thm1_data(&mut seeded(s.seed), s.n, params.beta);
    if !check_thm1_conditions(&state, params.beta, s.allow_boundary) {
        return Err(Failure::usage(
            "initial data violates the hypotheses; set allow_boundary for beta = -pi/2",
        ));
    }
    let d0 = phase_diameter(state.theta.as_slice());
    let traj = integrate(&state, &params, &s.integrator)?;
    let mut csv = String::from("t,diameter,bound\n");
    let mut worst = f64::NEG_INFINITY;
    for (x, d) in traj.samples.iter().zip(&traj.diagnostics) {
        let bound = diameter_bound(x.time, d0, params.beta);
        worst = worst.max(d.diameter - bound);
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_num(x.time),
            fmt_num(d.diameter),
            fmt_num(bound)
        ));
    }
    out.write_csv(
        "fig5.csv",
        &csv,
        &Plot::lines("t", "phase diameter", &[(2, "diameter"), (3, "bound")]),
    )?;
    let n = s.n;
    let diag = n * n + n + 2;
    out.write_csv(
        "trajectory.csv",
        &trajectory_csv(&traj),
        &Plot::lines("t", "coupling", &[(diag + 3, "kmin"), (diag + 4, "kmax")]),
    )?;
    let verdict = detect_sync(
        &traj,
        params.beta,
        kuramoto_signed::dynamics::DEFAULT_TOL_PHASE,
        kuramoto_signed::dynamics::DEFAULT_TOL_KAPPA,
    );
    out.write(
        "verdict.json",
        &serde_json::to_string_pretty(&verdict).expect("verdicts serialize"),
    )?;
    println!(
        "fig5: D0={} max excess over bound={} verdict={:?} -> {}",
        fmt_num(d0),
        fmt_num(worst),
        verdict.kind,
        out.dir().display()
    );
    if worst > 1e-6 {
        return Err(Failure::Assertion(format!(
            "diameter exceeded the bound by {worst:e}"
        )));
    }
    if verdict.kind != SyncKind::CompleteSync {
        return Err(Failure::Assertion(format!("ended in {:?}", verdict.kind)));
    }
    Ok(())
}

/// Critical diameter over `(β, ε)`, one panel per coupling floor.
fn fig7(s: &Fig7Settings, out: &Output) -> CliResult<()> {
    if s.kappas.is_empty() || s.beta_count == 0 || s.eps_count == 0 {
        return Err(Failure::usage("fig7 axes must be nonempty"));
    }
    if s.beta_count * s.eps_count > MAX_PANEL_CELLS {
        return Err(Failure::usage(format!(
            "a panel may hold at most {MAX_PANEL_CELLS} cells"
        )));
    }
    if !(s.eps_min > 0.0 && s.eps_max >= s.eps_min) {
        return Err(Failure::usage("need 0 < eps_min <= eps_max"));
    }
    let betas = linspace(s.beta_range[0], s.beta_range[1], s.beta_count);
    let eps = geomspace(s.eps_min, s.eps_max, s.eps_count);
    let mut tables = Vec::new();
    for (i, &k) in s.kappas.iter().enumerate() {
        let t = sweep_critical_diameter(&betas, &eps, &[k], s.grid_points)?;
        out.write_csv(
            &format!("fig7_panel_{i}.csv"),
            &kuramoto_signed::io::sweep_csv(&t),
            &Plot::Surface {
                x: 1,
                y: 2,
                z: 4,
                xlabel: "beta".into(),
                ylabel: "epsilon".into(),
                logx: false,
            },
        )?;
        tables.push(t);
    }
    // a stronger initial inhibition never enlarges the critical diameter
    let mut order: Vec<usize> = (0..s.kappas.len()).collect();
    order.sort_by(|&x, &y| s.kappas[y].total_cmp(&s.kappas[x]));
    let mut violations = 0;
    for w in order.windows(2) {
        let (hi, lo) = (&tables[w[0]], &tables[w[1]]);
        violations += hi
            .values
            .iter()
            .zip(&lo.values)
            .filter(|(a, b)| b > a)
            .count();
    }
    println!(
        "fig7: {} panels of {} cells, {violations} ordering violations -> {}",
        tables.len(),
        betas.len() * eps.len(),
        out.dir().display()
    );
    if violations > 0 {
        return Err(Failure::Assertion(format!(
            "{violations} cells where a more negative coupling floor gave a larger critical diameter"
        )));
    }
    Ok(())
}

fn verify_all(s: &VerifyAllSettings, out: &Output) -> CliResult<()> {
    let mut failed = Vec::new();
    for suite in Suite::ALL {
        let report = run_suite(suite, s.seed)?;
        out.write(&format!("verify_{}.txt", report.suite), &report.render())?;
        for c in report.checks.iter().filter(|c| !c.passed) {
            println!("{}", c.line());
        }
        println!(
            "{}: {} checks, {} failed",
            report.suite,
            report.checks.len(),
            report.failures()
        );
        if !report.passed() {
            failed.push(report.suite);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!(
            "failing suites: {}",
            failed.join(", ")
        )))
    }
}
