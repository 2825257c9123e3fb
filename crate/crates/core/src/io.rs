//! Text formats: JSON network specs, CSV matrices, trajectories, spectra,
//! admissible-p tables and critical-diameter sweeps.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::basins::SweepTable;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::model::NetworkSpec;
use crate::spectral::{AdmissiblePRange, Spectrum};

/// Scientific notation with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `contents` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let file_name = path.file_name().ok_or_else(|| {
        std::io::Error::new(std::io::ErrorKind::InvalidInput, "path has no file name")
    })?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

pub fn parse_network_spec(json: &str) -> Result<NetworkSpec> {
    let spec: NetworkSpec = serde_json::from_str(json).map_err(|e| Error::Format(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

pub fn network_spec_json(spec: &NetworkSpec) -> String {
    serde_json::to_string_pretty(spec).expect("network specs always serialize")
}

/// One row per line, comma separated.
pub fn matrix_to_csv(m: &SquareMatrix) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let line: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<SquareMatrix> {
    let rows = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(r, line)| {
            line.split(',')
                .map(|cell| {
                    cell.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Format(format!("row {r}: cannot parse {cell:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    if rows.is_empty() {
        return Err(Error::Format("matrix file is empty".into()));
    }
    let m = SquareMatrix::from_rows(&rows)?;
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::Format("matrix entries must be finite".into()));
    }
    Ok(m)
}

/// Header: `t`, `theta_<i>`, `kappa_<i>_<j>`, then the diagnostics columns.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let Some(first) = traj.samples.first() else {
        return String::new();
    };
    let n = first.n();
    let mut out = String::from("t");
    for i in 0..n {
        let _ = write!(out, ",theta_{i}");
    }
    for i in 0..n {
        for j in 0..n {
            let _ = write!(out, ",kappa_{i}_{j}");
        }
    }
    out.push_str(",diameter,r1,r2,kmin,kmax\n");
    for (s, d) in traj.samples.iter().zip(&traj.diagnostics) {
        out.push_str(&fmt_num(s.time));
        for &v in s.theta.as_slice().iter().chain(s.kappa.as_slice()) {
            out.push(',');
            out.push_str(&fmt_num(v));
        }
        for v in [d.diameter, d.r1, d.r2, d.kmin, d.kmax] {
            out.push(',');
            out.push_str(&fmt_num(v));
        }
        out.push('\n');
    }
    out
}

pub fn spectrum_csv(spec: &Spectrum) -> String {
    let mut out = String::from("value,multiplicity\n");
    for &(v, m) in &spec.entries {
        let _ = writeln!(out, "{},{m}", fmt_num(v));
    }
    out
}

/// Rows `(W, m, range)`; missing bounds are left blank.
pub fn admissible_csv(rows: &[(usize, usize, AdmissiblePRange)]) -> String {
    let mut out = String::from("W,m,kind,lower,upper\n");
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    for (w, m, r) in rows {
        let _ = writeln!(
            out,
            "{w},{m},{},{},{}",
            r.kind(),
            opt(r.lower()),
            opt(r.upper())
        );
    }
    out
}

pub fn sweep_csv(table: &SweepTable) -> String {
    let mut out = String::from("beta,epsilon,kappa_min0,d_bar\n");
    for row in table.rows() {
        let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Grid axes and resolution for a sweep, without the values.
pub fn sweep_metadata_json(table: &SweepTable) -> String {
    serde_json::to_string_pretty(&serde_json::json!({
        "axes": ["beta", "epsilon", "kappa_min0"],
        "order": "beta slowest, kappa_min0 fastest",
        "beta": table.betas,
        "epsilon": table.epsilons,
        "kappa_min0": table.kappas,
        "grid_points": table.grid_points,
        "cells": table.values.len(),
    }))
    .expect("metadata serializes")
}

/// `PASS <assertion> t=<time>` or `FAIL ...`.
pub fn report_line(passed: bool, assertion: &str, time: f64) -> String {
    format!(
        "{} {assertion} t={}",
        if passed { "PASS" } else { "FAIL" },
        fmt_num(time)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate, IntegratorConfig, SystemState};
    use crate::model::{BlockNetworkSpec, ModelParams, PhaseState};

    #[test]
    fn matrix_round_trip() {
        let m = SquareMatrix::from_fn(3, |i, j| (i as f64 + 1.0) / (j as f64 + 3.0) - 0.1);
        let back = matrix_from_csv(&matrix_to_csv(&m)).unwrap();
        assert_eq!(back, m);
        assert!(matrix_from_csv("1,2\n3").is_err());
        assert!(matrix_from_csv("1,x\n3,4").is_err());
        assert!(matrix_from_csv("").is_err());
    }

    #[test]
    fn trajectory_header_and_width() {
        let s = SystemState::new(
            PhaseState::new(vec![0.0, 0.5]).unwrap(),
            SquareMatrix::from_fn(2, |_, _| 0.5),
        )
        .unwrap();
        let p = ModelParams::new(0.0, 0.0, -1.0, 1.0).unwrap();
        let traj = integrate(&s, &p, &IntegratorConfig::new(0.1, 0.3, 1).unwrap()).unwrap();
        let csv = trajectory_csv(&traj);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,theta_0,theta_1,kappa_0_0,kappa_0_1,kappa_1_0,kappa_1_1,diameter,r1,r2,kmin,kmax"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 12);
        assert_eq!(csv.lines().count(), 1 + traj.len());
    }

    #[test]
    fn admissible_rows() {
        let csv = admissible_csv(&[
            (3, 0, AdmissiblePRange::UpperBounded { upper: 2.5 }),
            (4, 1, AdmissiblePRange::Empty),
        ]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[1], format!("3,0,upper,,{}", fmt_num(2.5)));
        assert_eq!(lines[2], "4,1,empty,,");
    }

    #[test]
    fn network_spec_parsing() {
        let spec =
            parse_network_spec(r#"{"type":"block","group_sizes":[2,2],"a":1,"b":-1}"#).unwrap();
        assert_eq!(
            spec,
            NetworkSpec::Block(BlockNetworkSpec::new(vec![2, 2], 1.0, -1.0).unwrap())
        );
        assert!(parse_network_spec(r#"{"type":"band","n":5,"w":3,"p":1}"#).is_err());
        assert!(parse_network_spec("{").is_err());
        let again = parse_network_spec(&network_spec_json(&spec)).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = std::env::temp_dir().join(format!("ks-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let p = dir.join("x.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(&dir).unwrap().count(), 1);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn report_format() {
        assert_eq!(report_line(true, "x", 1.0), "PASS x t=1.0000000000000000e0");
        assert!(report_line(false, "y", 0.0).starts_with("FAIL y t="));
    }
}
