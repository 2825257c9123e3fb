//! JSON run configuration for `simulate`.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use kuramoto_signed::io::matrix_from_csv;
use kuramoto_signed::sampling::{seeded, uniform_in_arc};
use kuramoto_signed::{
    BandNetworkSpec, BlockNetworkSpec, CouplingMatrix, IntegratorConfig, ModelParams, PhaseState,
    SystemState,
};
use serde::{Deserialize, Serialize};

use crate::failure::{CliResult, Context, Failure};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum NetworkConfig {
    Block(BlockNetworkSpec),
    Band(BandNetworkSpec),
    /// CSV coupling matrix; relative paths resolve against the config file.
    Matrix {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialPhases {
    Explicit { values: Vec<f64> },
    UniformInArc { start: f64, width: f64, seed: u64 },
    RotatingWave { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tol_phase")]
    pub phase: f64,
    #[serde(default = "default_tol_kappa")]
    pub kappa: f64,
}

fn default_tol_phase() -> f64 {
    kuramoto_signed::dynamics::DEFAULT_TOL_PHASE
}

fn default_tol_kappa() -> f64 {
    kuramoto_signed::dynamics::DEFAULT_TOL_KAPPA
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            phase: default_tol_phase(),
            kappa: default_tol_kappa(),
        }
    }
}

fn default_integrator() -> IntegratorConfig {
    IntegratorConfig::default()
}

fn default_outputs() -> PathBuf {
    PathBuf::from(".")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParams,
    pub network: NetworkConfig,
    pub initial_phases: InitialPhases,
    #[serde(default = "default_integrator")]
    pub integrator: IntegratorConfig,
    /// Output subdirectory under `--out`.
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Failure::usage(format!("malformed config: {e}")))?;
        cfg.model.validate()?;
        cfg.integrator.validate()?;
        if !(cfg.tolerances.phase > 0.0 && cfg.tolerances.kappa > 0.0) {
            return Err(Failure::usage("tolerances must be positive"));
        }
        if cfg.outputs.is_absolute() {
            return Err(Failure::usage("outputs must be relative to --out"));
        }
        match &cfg.network {
            NetworkConfig::Block(s) => s.validate()?,
            NetworkConfig::Band(s) => s.validate()?,
            NetworkConfig::Matrix { .. } => {}
        }
        Ok(cfg)
    }

    /// Reads a config file and checks that every referenced path exists.
    pub fn load(path: &Path) -> CliResult<(Self, PathBuf)> {
        let text = fs::read_to_string(path).context(format!("reading {}", path.display()))?;
        let cfg = Self::parse(&text)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        if let NetworkConfig::Matrix { path: m } = &cfg.network {
            let full = base.join(m);
            if !full.is_file() {
                return Err(Failure::usage(format!(
                    "coupling matrix {} does not exist",
                    full.display()
                )));
            }
        }
        Ok((cfg, base))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }

    pub fn coupling(&self, base: &Path) -> CliResult<CouplingMatrix> {
        Ok(match &self.network {
            NetworkConfig::Block(s) => kuramoto_signed::build_block_network(s),
            NetworkConfig::Band(s) => kuramoto_signed::build_band_network(s),
            NetworkConfig::Matrix { path } => {
                let full = base.join(path);
                let text =
                    fs::read_to_string(&full).context(format!("reading {}", full.display()))?;
                matrix_from_csv(&text).context(format!("parsing {}", full.display()))?
            }
        })
    }

    pub fn phases(&self, n: usize) -> CliResult<PhaseState> {
        match &self.initial_phases {
            InitialPhases::Explicit { values } => {
                if values.len() != n {
                    return Err(Failure::usage(format!(
                        "{} initial phases given for {n} nodes",
                        values.len()
                    )));
                }
                Ok(PhaseState::new(values.clone())?)
            }
            InitialPhases::UniformInArc { start, width, seed } => {
                if !(start.is_finite() && *width >= 0.0 && *width <= 2.0 * PI) {
                    return Err(Failure::usage(
                        "arc needs a finite start and width in [0, 2pi]",
                    ));
                }
                Ok(uniform_in_arc(&mut seeded(*seed), n, *start, *width))
            }
            InitialPhases::RotatingWave { m } => {
                if *m >= n {
                    return Err(Failure::usage(format!(
                        "winding number {m} needs m < N = {n}"
                    )));
                }
                Ok(PhaseState::rotating_wave(n, *m))
            }
        }
    }

    pub fn initial_state(&self, base: &Path) -> CliResult<SystemState> {
        let kappa = self.coupling(base)?;
        let theta = self.phases(kappa.dim())?;
        Ok(SystemState::new(theta, kappa)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "model": {"beta": -1.0471975511965976, "epsilon": 1.0},
        "network": {"type": "block", "group_sizes": [10], "a": 1.0, "b": 1.0},
        "initial_phases": {"kind": "uniform_in_arc", "start": 0.0, "width": 0.8, "seed": 7}
    }"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.integrator, IntegratorConfig::default());
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.outputs, PathBuf::from("."));
    }

    #[test]
    fn normalization_is_idempotent() {
        let once = RunConfig::parse(SAMPLE).unwrap().to_json();
        let twice = RunConfig::parse(&once).unwrap().to_json();
        assert_eq!(once, twice);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::parse("{").is_err());
        let no_seed = SAMPLE.replace(r#", "seed": 7"#, "");
        assert!(matches!(RunConfig::parse(&no_seed), Err(Failure::Usage(_))));
        let unknown = SAMPLE.replace(r#""epsilon": 1.0"#, r#""epsilon": 1.0, "gamma": 2"#);
        assert!(RunConfig::parse(&unknown).is_err());
        let bad_step = SAMPLE.replace(
            r#""initial_phases""#,
            r#""integrator": {"step": 0.5, "t_end": 1.0}, "initial_phases""#,
        );
        assert!(RunConfig::parse(&bad_step).is_err());
    }

    #[test]
    fn explicit_phases_must_match_n() {
        let cfg = RunConfig::parse(
            r#"{"model": {"beta": -1.0},
                "network": {"type": "band", "n": 6, "w": 1, "p": 0.5},
                "initial_phases": {"kind": "explicit", "values": [0.0, 1.0]}}"#,
        )
        .unwrap();
        assert!(cfg.initial_state(Path::new(".")).is_err());
    }
}
