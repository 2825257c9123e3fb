use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kuramoto_signed::critical_diameter;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kuramoto-signed"))
}

fn run(out: &Path, args: &[&str]) -> Output {
    bin()
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn spectrum_examples() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let cases = [
        (
            r#"{"type":"block","group_sizes":[3,3],"a":1,"b":-1}"#,
            "sync",
            "Unstable",
        ),
        (r#"{"type":"band","n":20,"w":3,"p":0.1}"#, "rotating:1", ""),
        (
            r#"{"type":"block","group_sizes":[5],"a":1,"b":0}"#,
            "sync",
            "Stable",
        ),
    ];
    for (i, (spec, kind, verdict)) in cases.iter().enumerate() {
        let net = write(d, &format!("net{i}.json"), spec);
        let out = d.join(format!("s{i}"));
        let o = run(&out, &["spectrum", "--network", &net, "--kind", kind]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let summary = json(&out.join("spectrum.json"));
        assert!(summary["max_deviation"].as_f64().unwrap() < 1e-8);
        if !verdict.is_empty() {
            assert_eq!(summary["verdict"]["verdict"], *verdict);
        }
        assert!(out.join("spectrum.csv").is_file());
    }
}

#[test]
fn spectrum_rejects_incompatible_kind() {
    let tmp = TempDir::new().unwrap();
    let band = write(
        tmp.path(),
        "band.json",
        r#"{"type":"band","n":20,"w":3,"p":0.1}"#,
    );
    let block = write(
        tmp.path(),
        "block.json",
        r#"{"type":"block","group_sizes":[2,2],"a":1,"b":1}"#,
    );
    assert_eq!(
        code(&run(
            tmp.path(),
            &["spectrum", "--network", &band, "--kind", "sync"]
        )),
        2
    );
    assert_eq!(
        code(&run(
            tmp.path(),
            &["spectrum", "--network", &block, "--kind", "rotating:1"]
        )),
        2
    );
    assert_eq!(
        code(&run(
            tmp.path(),
            &["spectrum", "--network", &block, "--kind", "splay"]
        )),
        2
    );
}

#[test]
fn admissible_p_examples() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &["admissible-p", "--n", "100", "--m", "0,2,4"]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&tmp.path().join("admissible_p.csv"));
    let find = |w: &str, m: &str| {
        rows.iter()
            .find(|r| r[0] == w && r[1] == m)
            .unwrap()
            .clone()
    };

    let mut last = 0.0;
    for w in 1..=49 {
        let r = find(&w.to_string(), "0");
        assert_eq!(r[2], "upper", "W={w}");
        let upper: f64 = r[4].parse().unwrap();
        assert!(upper >= last);
        last = upper;
    }
    assert_ne!(find("10", "2")[2], "empty");
    assert_eq!(find("40", "4")[2], "empty");
}

#[test]
fn sweep_one_cell_matches_library() {
    let tmp = TempDir::new().unwrap();
    let o = run(
        tmp.path(),
        &[
            "sweep-dbar",
            "--beta",
            "-0.5pi",
            "--eps-min",
            "0.7",
            "--eps-max",
            "0.7",
            "--eps-count",
            "1",
            "--kappa-min",
            "-0.3",
            "--kappa-max",
            "-0.3",
            "--kappa-count",
            "1",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&tmp.path().join("dbar_panel_0.csv"));
    assert_eq!(rows.len(), 1);
    let want = critical_diameter(-0.5 * std::f64::consts::PI, 0.7, -0.3, 10_000)
        .unwrap()
        .d_bar;
    assert_eq!(rows[0][3].parse::<f64>().unwrap(), want);
}

#[test]
fn sweep_panel_shape() {
    let tmp = TempDir::new().unwrap();
    let o = run(
        tmp.path(),
        &[
            "sweep-dbar",
            "--beta=-0.5pi",
            "--eps-count",
            "8",
            "--kappa-min=-0.1",
            "--kappa-max=-0.7",
            "--kappa-count",
            "7",
        ],
    );
    assert_eq!(code(&o), 0);
    let v: Vec<f64> = csv_rows(&tmp.path().join("dbar_panel_0.csv"))
        .iter()
        .map(|r| r[3].parse().unwrap())
        .collect();
    // rows run epsilon-major, kappa fastest
    let at = |ie: usize, ik: usize| v[ie * 7 + ik];
    for ie in 0..8 {
        for ik in 0..7 {
            if ie + 1 < 8 {
                assert!(at(ie + 1, ik) >= at(ie, ik));
            }
            if ik + 1 < 7 {
                assert!(at(ie, ik + 1) <= at(ie, ik));
            }
        }
        // first kappa column is -0.1, last is -0.7
        assert!(at(ie, 0) >= at(ie, 6));
    }
}

#[test]
fn sweep_rejects_oversized_panels() {
    let tmp = TempDir::new().unwrap();
    let o = run(
        tmp.path(),
        &[
            "sweep-dbar",
            "--beta=-1",
            "--eps-count",
            "200",
            "--kappa-count",
            "200",
        ],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_suites() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run(tmp.path(), &["verify", "bogus"])), 2);

    let o = run(tmp.path(), &["verify", "theorem1"]);
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(
        stdout
            .lines()
            .filter(|l| l.starts_with("PASS theorem1_trial_"))
            .count(),
        50
    );

    let start = std::time::Instant::now();
    let o = run(tmp.path(), &["verify", "spectral-oracle"]);
    assert_eq!(code(&o), 0);
    assert!(start.elapsed().as_secs() < 60);
    assert!(tmp.path().join("verify_spectral-oracle.txt").is_file());
}

const THM1: &str = r#"{
    "model": {"beta": -1.0471975511965976, "epsilon": 1.0},
    "network": {"type": "block", "group_sizes": [10], "a": 1.0, "b": 1.0},
    "initial_phases": {"kind": "uniform_in_arc", "start": 0.0, "width": 0.8, "seed": 7},
    "integrator": {"step": 0.01, "t_end": 100.0, "sample_every": 10},
    "outputs": "run"
}"#;

#[test]
fn simulate_positive_coupling_synchronizes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "thm1.json", THM1);
    let o = run(tmp.path(), &["--gnuplot", "simulate", &cfg]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let verdict = json(&tmp.path().join("run/verdict.json"));
    assert_eq!(verdict["kind"], "CompleteSync");
    let csv = fs::read_to_string(tmp.path().join("run/trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,theta_0,"));
    assert!(tmp.path().join("run/trajectory.gp").is_file());
}

#[test]
fn simulate_frozen_splay_stays_put() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "splay.json",
        r#"{"model": {"beta": -1.0, "epsilon": 0.0},
            "network": {"type": "band", "n": 12, "w": 2, "p": 0.5},
            "initial_phases": {"kind": "rotating_wave", "m": 1},
            "integrator": {"step": 0.01, "t_end": 20.0, "sample_every": 20}}"#,
    );
    let o = run(tmp.path(), &["simulate", &cfg]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        json(&tmp.path().join("verdict.json"))["kind"],
        "NotConverged"
    );
    let text = fs::read_to_string(tmp.path().join("trajectory.csv")).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|&h| h == "diameter").unwrap();
    let d: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect();
    assert!(d.iter().all(|x| (x - d[0]).abs() < 1e-9));
}

#[test]
fn simulate_error_codes() {
    let tmp = TempDir::new().unwrap();
    let bad = write(tmp.path(), "bad.json", "{ not json");
    assert_eq!(code(&run(tmp.path(), &["simulate", &bad])), 2);
    let missing = write(
        tmp.path(),
        "missing.json",
        r#"{"model": {"beta": -1.0},
            "network": {"type": "matrix", "path": "nowhere.csv"},
            "initial_phases": {"kind": "explicit", "values": [0, 1]}}"#,
    );
    assert_eq!(code(&run(tmp.path(), &["simulate", &missing])), 2);

    let blowup = write(
        tmp.path(),
        "blowup.json",
        r#"{"model": {"omega": 1.7976931348623157e308, "beta": -1.0},
            "network": {"type": "block", "group_sizes": [2], "a": 1, "b": 1},
            "initial_phases": {"kind": "explicit", "values": [0, 1]}}"#,
    );
    let o = run(tmp.path(), &["simulate", &blowup]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("step 1"));
}

#[test]
fn simulate_reads_matrix_files_relative_to_config() {
    let tmp = TempDir::new().unwrap();
    write(tmp.path(), "k.csv", "1,0.5,0.5\n0.5,1,0.5\n0.5,0.5,1\n");
    let cfg = write(
        tmp.path(),
        "m.json",
        r#"{"model": {"beta": -1.2, "epsilon": 0.5},
            "network": {"type": "matrix", "path": "k.csv"},
            "initial_phases": {"kind": "explicit", "values": [0.0, 0.2, 0.4]},
            "integrator": {"step": 0.01, "t_end": 60.0, "sample_every": 10}}"#,
    );
    let out = tmp.path().join("out");
    assert_eq!(code(&run(&out, &["simulate", &cfg])), 0);
    assert_eq!(json(&out.join("verdict.json"))["kind"], "CompleteSync");
}

#[test]
fn runs_are_byte_identical_and_configs_normalize() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "thm1.json", THM1);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&run(&a, &["simulate", &cfg])), 0);
    assert_eq!(code(&run(&b, &["simulate", &cfg])), 0);
    for f in ["run/trajectory.csv", "run/verdict.json", "run/config.json"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    // feeding the normalized config back reproduces it exactly
    let normalized = a.join("run/config.json");
    let c = tmp.path().join("c");
    assert_eq!(
        code(&run(&c, &["simulate", normalized.to_str().unwrap()])),
        0
    );
    assert_eq!(
        fs::read(&normalized).unwrap(),
        fs::read(c.join("run/config.json")).unwrap()
    );
}

#[test]
fn thread_env_is_validated() {
    let tmp = TempDir::new().unwrap();
    let o = bin()
        .env("KURAMOTO_SIGNED_THREADS", "zero")
        .args([
            "--out",
            tmp.path().to_str().unwrap(),
            "admissible-p",
            "--n",
            "10",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    let o = bin()
        .env("KURAMOTO_SIGNED_THREADS", "2")
        .args([
            "--out",
            tmp.path().to_str().unwrap(),
            "admissible-p",
            "--n",
            "10",
        ])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn recipes() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run(tmp.path(), &["recipe", "fig99"])), 2);
    assert_eq!(
        code(&run(
            tmp.path(),
            &["recipe", "fig5", "--override", "{\"gamma\": 1}"]
        )),
        2
    );

    let o = run(tmp.path(), &["--gnuplot", "recipe", "fig4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(csv_rows(&tmp.path().join("fig4/fig4.csv")).len(), 4 * 49);
    assert!(tmp.path().join("fig4/fig4.gp").is_file());
    assert_eq!(json(&tmp.path().join("fig4/recipe.json"))["n"], 100);

    let o = run(tmp.path(), &["recipe", "fig5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        json(&tmp.path().join("fig5/verdict.json"))["kind"],
        "CompleteSync"
    );

    // without the boundary override the strict hypothesis rejects beta = -pi/2
    let o = run(
        tmp.path(),
        &[
            "recipe",
            "fig5",
            "--override",
            r#"{"allow_boundary": false}"#,
        ],
    );
    assert_eq!(code(&o), 2);

    let o = run(
        tmp.path(),
        &[
            "recipe",
            "fig7",
            "--override",
            r#"{"beta_count": 6, "eps_count": 5, "grid_points": 2000}"#,
        ],
    );
    assert_eq!(code(&o), 0);
    assert!(tmp.path().join("fig7/fig7_panel_1.csv").is_file());
}
