use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use kuramoto_signed::io::{
    admissible_csv, fmt_num, parse_network_spec, sweep_csv, sweep_metadata_json, trajectory_csv,
};
use kuramoto_signed::spectral::rotating_wave_jacobian;
use kuramoto_signed::verify::{run_suite, Suite, SuiteReport};
use kuramoto_signed::{
    admissible_p, antipodal_spectrum, build_block_network, complete_sync_spectrum, detect_sync,
    integrate, multiset_distance, numeric_jacobian, numeric_spectrum, rotating_wave_eigenvalues,
    stability_verdict, sweep_critical_diameter, AdmissiblePRange, NetworkSpec, PhaseState,
    Spectrum, StabilityVerdict, SweepTable,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::failure::{CliResult, Context, Failure};
use crate::output::{Output, Plot};

/// Largest closed-form vs numeric deviation accepted by `spectrum`.
pub const SPECTRUM_TOL: f64 = 1e-8;

/// Most cells allowed in one critical-diameter panel.
pub const MAX_PANEL_CELLS: usize = 10_000;

/// Parses an angle in radians, or in units of π with a `pi` suffix (`-0.5pi`).
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (num, scale) = match t.strip_suffix("pi") {
        Some(rest) => (rest.trim(), PI),
        None => (t, 1.0),
    };
    let num = match num {
        "" | "+" => 1.0,
        "-" => -1.0,
        _ => num
            .parse::<f64>()
            .map_err(|e| format!("bad angle {s:?}: {e}"))?,
    };
    let v = num * scale;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("angle {s:?} is not finite"))
    }
}

pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

pub fn geomspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), count)
        .into_iter()
        .map(f64::exp)
        .collect()
}

pub fn simulate(config: &Path, out: &Output) -> CliResult<()> {
    let (cfg, base) = RunConfig::load(config)?;
    let state = cfg.initial_state(&base)?;
    let traj = integrate(&state, &cfg.model, &cfg.integrator)?;
    let verdict = detect_sync(
        &traj,
        cfg.model.beta,
        cfg.tolerances.phase,
        cfg.tolerances.kappa,
    );
    let dir = out.sub(&cfg.outputs)?;
    let n = state.n();
    let diag = n * n + n + 2;
    dir.write_csv(
        "trajectory.csv",
        &trajectory_csv(&traj),
        &Plot::lines(
            "t",
            "diagnostics",
            &[(diag, "diameter"), (diag + 1, "R1"), (diag + 2, "R2")],
        ),
    )?;
    dir.write(
        "verdict.json",
        &serde_json::to_string_pretty(&verdict).expect("verdicts serialize"),
    )?;
    dir.write("config.json", &cfg.to_json())?;
    println!(
        "verdict {} final_diameter={} samples={} -> {}",
        serde_json::to_value(&verdict.kind).expect("serializes")["kind"]
            .as_str()
            .unwrap_or("?"),
        fmt_num(verdict.final_diameter),
        traj.len(),
        dir.dir().display()
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    Sync,
    Antipodal,
    Rotating(usize),
}

impl std::str::FromStr for EquilibriumKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "sync" => Ok(Self::Sync),
            "antipodal" => Ok(Self::Antipodal),
            _ => s
                .strip_prefix("rotating:")
                .and_then(|m| m.parse().ok())
                .map(Self::Rotating)
                .ok_or_else(|| {
                    format!("unknown equilibrium kind {s:?}; use sync, antipodal or rotating:<m>")
                }),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SpectrumSummary {
    pub kind: String,
    pub n: usize,
    /// Closed-form eigenvalues with multiplicities.
    pub closed_form: Spectrum,
    pub max_deviation: f64,
    pub verdict: StabilityVerdict,
}

/// Closed-form and numeric spectra on the closed-form scale, plus the factor
/// mapping that scale to Jacobian eigenvalues.
fn spectra(spec: &NetworkSpec, kind: EquilibriumKind) -> CliResult<(Spectrum, Vec<f64>, f64)> {
    match (spec, kind) {
        (NetworkSpec::Block(b), EquilibriumKind::Sync | EquilibriumKind::Antipodal) => {
            let n = b.n();
            let (closed, theta) = if kind == EquilibriumKind::Sync {
                (complete_sync_spectrum(b)?, PhaseState::new(vec![0.0; n])?)
            } else {
                (antipodal_spectrum(b)?, b.equilibrium_phases())
            };
            let jac = numeric_jacobian(&build_block_network(b), &theta, 0.0)?;
            let scale = -(n as f64);
            let numeric = numeric_spectrum(&jac)?
                .into_iter()
                .map(|v| v * scale)
                .collect();
            Ok((closed, numeric, 1.0 / scale))
        }
        (NetworkSpec::Band(b), EquilibriumKind::Rotating(m)) => {
            if m >= b.n {
                return Err(Failure::usage(format!(
                    "winding number {m} needs m < N = {}",
                    b.n
                )));
            }
            let closed = Spectrum::from_values(&rotating_wave_eigenvalues(b, m)?);
            let nf = b.n as f64;
            let numeric = numeric_spectrum(&rotating_wave_jacobian(b, m)?)?
                .into_iter()
                .map(|v| v * nf)
                .collect();
            Ok((closed, numeric, 1.0 / nf))
        }
        (NetworkSpec::Block(_), EquilibriumKind::Rotating(_)) => {
            Err(Failure::usage("rotating waves need a band network"))
        }
        (NetworkSpec::Band(_), _) => Err(Failure::usage(
            "sync and antipodal spectra need a block network",
        )),
    }
}

pub fn spectrum(network: &Path, kind: &str, tol: f64, out: &Output) -> CliResult<SpectrumSummary> {
    let kind_parsed: EquilibriumKind = kind.parse().map_err(Failure::usage)?;
    let text = fs::read_to_string(network).context(format!("reading {}", network.display()))?;
    let spec = parse_network_spec(&text).context(format!("parsing {}", network.display()))?;
    let (closed, mut numeric, to_jacobian) = spectra(&spec, kind_parsed)?;
    let mut values = closed.values();
    values.sort_by(f64::total_cmp);
    numeric.sort_by(f64::total_cmp);
    let dev = multiset_distance(&values, &numeric);
    let jac: Vec<f64> = values.iter().map(|v| v * to_jacobian).collect();
    let verdict = stability_verdict(&jac, tol)?;

    let mut csv = String::from("index,closed_form,numeric,abs_diff\n");
    for (i, (c, x)) in values.iter().zip(&numeric).enumerate() {
        csv.push_str(&format!(
            "{i},{},{},{}\n",
            fmt_num(*c),
            fmt_num(*x),
            fmt_num((c - x).abs())
        ));
    }
    out.write_csv(
        "spectrum.csv",
        &csv,
        &Plot::lines("index", "eigenvalue", &[(2, "closed form"), (3, "numeric")]),
    )?;
    let summary = SpectrumSummary {
        kind: kind.to_string(),
        n: spec.n(),
        closed_form: closed,
        max_deviation: dev,
        verdict,
    };
    out.write(
        "spectrum.json",
        &serde_json::to_string_pretty(&summary).expect("summaries serialize"),
    )?;
    println!(
        "kind={kind} n={} max_deviation={} verdict={verdict:?}",
        summary.n,
        fmt_num(dev)
    );
    if dev > SPECTRUM_TOL {
        return Err(Failure::Assertion(format!(
            "closed form and numeric spectra differ by {dev:e}"
        )));
    }
    Ok(summary)
}

pub fn admissible_rows(
    n: usize,
    ms: &[usize],
    w_min: usize,
    w_max: usize,
) -> CliResult<Vec<(usize, usize, AdmissiblePRange)>> {
    let mut rows = Vec::new();
    for &m in ms {
        for w in w_min..=w_max {
            rows.push((w, m, admissible_p(n, w, m)?));
        }
    }
    Ok(rows)
}

pub fn admissible(
    n: usize,
    ms: &[usize],
    w_min: usize,
    w_max: Option<usize>,
    out: &Output,
    name: &str,
) -> CliResult<Vec<(usize, usize, AdmissiblePRange)>> {
    let w_max = w_max.unwrap_or_else(|| kuramoto_signed::BandNetworkSpec::max_bandwidth(n));
    if w_min < 1 || w_min > w_max {
        return Err(Failure::usage(format!(
            "empty bandwidth range {w_min}..={w_max}"
        )));
    }
    if ms.is_empty() {
        return Err(Failure::usage("need at least one winding number"));
    }
    let rows = admissible_rows(n, ms, w_min, w_max)?;
    out.write_csv(
        name,
        &admissible_csv(&rows),
        &Plot::lines("W", "p", &[(5, "upper bound"), (4, "lower bound")]),
    )?;
    let empty = rows.iter().filter(|r| r.2.is_empty()).count();
    println!(
        "N={n} rows={} empty={empty} -> {}",
        rows.len(),
        out.dir().join(name).display()
    );
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub betas: Vec<f64>,
    pub eps_min: f64,
    pub eps_max: f64,
    pub eps_count: usize,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub kappa_count: usize,
    pub grid_points: usize,
}

impl SweepGrid {
    pub fn epsilons(&self) -> Vec<f64> {
        geomspace(self.eps_min, self.eps_max, self.eps_count)
    }

    pub fn kappas(&self) -> Vec<f64> {
        linspace(self.kappa_min, self.kappa_max, self.kappa_count)
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.betas.is_empty() || self.eps_count == 0 || self.kappa_count == 0 {
            return Err(Failure::usage("sweep axes must be nonempty"));
        }
        if self.eps_count * self.kappa_count > MAX_PANEL_CELLS {
            return Err(Failure::usage(format!(
                "a panel may hold at most {MAX_PANEL_CELLS} cells"
            )));
        }
        if !(self.eps_min > 0.0 && self.eps_max >= self.eps_min) {
            return Err(Failure::usage("need 0 < eps-min <= eps-max"));
        }
        if !(self.kappa_min < 0.0 && self.kappa_max < 0.0) {
            return Err(Failure::usage("kappa bounds must be negative"));
        }
        Ok(())
    }
}

/// One panel per `β`, written as `<prefix>_<i>.csv`, plus `<prefix>.json` metadata.
pub fn sweep_dbar(grid: &SweepGrid, out: &Output, prefix: &str) -> CliResult<Vec<SweepTable>> {
    grid.validate()?;
    let (eps, kappas) = (grid.epsilons(), grid.kappas());
    let mut tables = Vec::new();
    for (i, &beta) in grid.betas.iter().enumerate() {
        let table = sweep_critical_diameter(&[beta], &eps, &kappas, grid.grid_points)?;
        out.write_csv(
            &format!("{prefix}_{i}.csv"),
            &sweep_csv(&table),
            &Plot::Surface {
                x: 2,
                y: 3,
                z: 4,
                xlabel: "epsilon".into(),
                ylabel: "kappa_min0".into(),
                logx: true,
            },
        )?;
        tables.push(table);
    }
    let meta = serde_json::json!({
        "grid": grid,
        "panels": tables.iter().map(|t| serde_json::from_str::<serde_json::Value>(&sweep_metadata_json(t)).expect("valid json")).collect::<Vec<_>>(),
    });
    out.write(
        &format!("{prefix}.json"),
        &serde_json::to_string_pretty(&meta).expect("serializes"),
    )?;
    println!(
        "{} panels of {} cells -> {}",
        tables.len(),
        eps.len() * kappas.len(),
        out.dir().display()
    );
    Ok(tables)
}

pub fn verify(suite: &str, seed: u64, out: &Output) -> CliResult<SuiteReport> {
    let suite: Suite = suite.parse()?;
    let report = run_suite(suite, seed)?;
    print!("{}", report.render());
    out.write(&format!("verify_{}.txt", report.suite), &report.render())?;
    println!(
        "{}: {} checks, {} failed",
        report.suite,
        report.checks.len(),
        report.failures()
    );
    Ok(report)
}

pub fn require_passed(report: &SuiteReport) -> CliResult<()> {
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!(
            "{} of {} checks failed in {}",
            report.failures(),
            report.checks.len(),
            report.suite
        )))
    }
}
