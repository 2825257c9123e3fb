//! `kuramoto-signed`: simulation, spectra, admissible-p scans, critical-diameter
//! sweeps, self-checks and figure recipes.
//!
//! Exit codes: 0 success, 1 assertion failure, 2 usage or config error,
//! 3 numerical failure.

mod commands;
mod config;
mod failure;
mod output;
mod recipes;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kuramoto_signed::verify::DEFAULT_SEED;

use crate::commands::{parse_angle, SweepGrid};
use crate::failure::{CliResult, Failure};
use crate::output::Output;

const THREADS_ENV: &str = "KURAMOTO_SIGNED_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "kuramoto-signed",
    version,
    about = "Kuramoto oscillators on signed and adaptive networks"
)]
struct Cli {
    /// Directory that receives every output file.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Also write a gnuplot script next to each CSV.
    #[arg(long, global = true)]
    gnuplot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a JSON run config; writes trajectory.csv and verdict.json.
    Simulate { config: PathBuf },
    /// Closed-form spectrum at an equilibrium, checked against the numeric Jacobian.
    Spectrum {
        /// JSON network spec with a "type" of block or band.
        #[arg(long)]
        network: PathBuf,
        /// sync, antipodal or rotating:<m>.
        #[arg(long)]
        kind: String,
        /// Jacobian eigenvalues within this of zero count as marginal.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Range of inhibition strengths p that stabilize rotating waves.
    AdmissibleP {
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Winding numbers, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [0usize, 1, 2, 4])]
        m: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        w_min: usize,
        /// Defaults to the largest valid bandwidth.
        #[arg(long)]
        w_max: Option<usize>,
    },
    /// Critical diameter over (epsilon, kappa_min0), one CSV panel per beta.
    SweepDbar {
        /// Phase lags, comma separated; radians or multiples of pi such as -0.5pi.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_angle, required = true)]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 1e-2)]
        eps_min: f64,
        #[arg(long, default_value_t = 2.0)]
        eps_max: f64,
        #[arg(long, default_value_t = 40)]
        eps_count: usize,
        #[arg(long, default_value_t = -0.05, allow_hyphen_values = true)]
        kappa_min: f64,
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        kappa_max: f64,
        #[arg(long, default_value_t = 40)]
        kappa_count: usize,
        #[arg(long, default_value_t = kuramoto_signed::basins::DEFAULT_DBAR_GRID)]
        grid_points: usize,
    },
    /// Run a self-check suite: spectral-oracle, invariance, theorem1, theorem2 or properties.
    Verify {
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Regenerate a figure's data: fig3, fig4, fig5, fig6, fig7 or verify-all.
    Recipe {
        name: String,
        /// JSON object merged into the recipe's pinned settings.
        #[arg(long = "override")]
        overrides: Option<String>,
    },
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        Failure::usage(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::usage(format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let out = Output::new(&cli.out, cli.gnuplot)?;
    match cli.command {
        Command::Simulate { config } => commands::simulate(&config, &out),
        Command::Spectrum { network, kind, tol } => {
            commands::spectrum(&network, &kind, tol, &out).map(|_| ())
        }
        Command::AdmissibleP { n, m, w_min, w_max } => {
            commands::admissible(n, &m, w_min, w_max, &out, "admissible_p.csv").map(|_| ())
        }
        Command::SweepDbar {
            beta,
            eps_min,
            eps_max,
            eps_count,
            kappa_min,
            kappa_max,
            kappa_count,
            grid_points,
        } => {
            let grid = SweepGrid {
                betas: beta,
                eps_min,
                eps_max,
                eps_count,
                kappa_min,
                kappa_max,
                kappa_count,
                grid_points,
            };
            commands::sweep_dbar(&grid, &out, "dbar_panel").map(|_| ())
        }
        Command::Verify { suite, seed } => {
            let report = commands::verify(&suite, seed, &out)?;
            commands::require_passed(&report)
        }
        Command::Recipe { name, overrides } => recipes::run(&name, overrides.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code() as u8)
        }
    }
}
