use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fucik(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fucik"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("spawn fucik")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// Data rows of a CSV written by the tool, header comments and column line stripped.
fn rows(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect()
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn with_config(body: &str) -> (TempDir, String) {
    let d = TempDir::new().unwrap();
    let p = d.path().join("run.toml");
    fs::write(&p, body).unwrap();
    (d, p.to_str().unwrap().to_string())
}

const UNFORCED: &str = r#"
[system]
n = 1
pair1 = { a = 4.0 }
pair2 = { a = 2.25 }
p1 = {}
p2 = {}
phi1 = { family = "step", limit = 0.0, width = 1.0 }
phi2 = { family = "step", limit = 0.0, width = 1.0 }
"#;

#[test]
fn linear_lambda_is_scaled_cosine() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&fucik(d.path(), &["resonance"])), 0);
    let table = rows(&d.path().join("functions.csv"));
    assert_eq!(table.len(), 256);
    for r in &table {
        let expected = 2.0 * r[0].cos();
        assert!((r[1] - expected).abs() < 1e-10 && (r[5] - expected).abs() < 1e-10);
    }
    let rep = report(d.path());
    assert_eq!(rep["tool"], "fucik");
    assert_eq!(rep["command"], "resonance");
    assert_eq!(rep["result"]["alpha"][0].as_f64().unwrap(), 0.0);
}

#[test]
fn zero_forcing_gives_zero_phi() {
    let (d, cfg) = with_config(UNFORCED);
    let out = d.path().join("out");
    assert_eq!(code(&fucik(&out, &["--config", &cfg, "resonance"])), 0);
    for r in rows(&out.join("functions.csv")) {
        assert_eq!(r[3], 0.0);
        assert_eq!(r[7], 0.0);
    }
    // α = 1/√a - √a/b for a = 4, b from the resonance identity
    let alpha = report(&out)["result"]["alpha"][0].as_f64().unwrap();
    let b = 4.0 / 9.0;
    assert!((alpha - (0.5 - 2.0 / b)).abs() < 1e-12, "{alpha}");
}

#[test]
fn default_zeros_are_four() {
    let d = TempDir::new().unwrap();
    let o = fucik(d.path(), &["zeros"]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(d.path().join("zeros.csv")).unwrap();
    assert!(text.starts_with("# fucik "));
    assert_eq!(rows(&d.path().join("zeros.csv")).len(), 4);
    for r in rows(&d.path().join("zeros.csv")) {
        assert!(r[7] < 1e-10);
    }
}

#[test]
fn minus_identity_contracts_with_quarter() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&fucik(d.path(), &["contraction"])), 0);
    let rep = report(d.path());
    let a0 = rep["result"]["cone"]["a0"].as_f64().unwrap();
    assert!((a0 - 0.25).abs() < 1e-12, "{a0}");
}

#[test]
fn neither_class_matrix_is_rejected() {
    let (d, cfg) = with_config("[contraction]\nmatrix = [[1.0, 0.0], [0.0, -1.0]]\n");
    let out = d.path().join("out");
    assert_eq!(code(&fucik(&out, &["--config", &cfg, "contraction"])), 2);
}

#[test]
fn dminus_zero_is_routed_backward() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&fucik(d.path(), &["zeros"])), 0);
    let text = fs::read_to_string(d.path().join("zeros.csv")).unwrap();
    let idx = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .find(|l| l.ends_with("D-"))
        .and_then(|l| l.split(',').next())
        .unwrap()
        .to_string();
    let o = fucik(d.path(), &["invariance", "--zero", &idx]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("routed to the backward map"));
    let rep = report(d.path());
    assert_eq!(rep["result"]["direction"], "backward");
    let params = &rep["result"]["params"];
    for key in ["r_min", "theta_radius", "lambda", "eta"] {
        assert!(params[key].as_f64().unwrap() > 0.0, "{key}");
    }
    assert_eq!(rep["result"]["report"]["violations"], 0);
}

#[test]
fn unforced_orbit_has_constant_radii() {
    let (d, cfg) = with_config(UNFORCED);
    let out = d.path().join("out");
    let o = fucik(&out, &["--config", &cfg, "orbit", "--iterates", "4", "--start", "0.3", "1.1", "5", "9"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = rows(&out.join("orbit.csv"));
    assert_eq!(table.len(), 5);
    for r in &table {
        assert!((r[3] - 5.0).abs() < 1e-6 && (r[4] - 9.0).abs() < 1e-6);
    }
}

#[test]
fn orbit_from_certified_set_grows() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&fucik(d.path(), &["orbit", "--iterates", "20"])), 0);
    let table = rows(&d.path().join("orbit.csv"));
    let min_r: Vec<f64> = table.iter().map(|r| r[3].min(r[4])).collect();
    assert!(min_r.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn precondition_and_config_errors_exit_two() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&fucik(d.path(), &["orbit", "--iterates", "0"])), 2);
    assert_eq!(code(&fucik(d.path(), &["scenario", "no-such-scenario"])), 2);
    let (c, cfg) = with_config("[zeros]\ngrdi = 16\n");
    assert_eq!(code(&fucik(&c.path().join("out"), &["--config", &cfg, "zeros"])), 2);
    assert_eq!(code(&fucik(d.path(), &["invariance", "--zero", "99"])), 2);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        assert_eq!(code(&fucik(d.path(), &["--seed", "7", "--samples", "300", "invariance"])), 0);
    }
    for f in ["invariant_set.csv", "report.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn sequential_flag_matches_parallel() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert_eq!(code(&fucik(a.path(), &["zeros"])), 0);
    assert_eq!(code(&fucik(b.path(), &["--sequential", "zeros"])), 0);
    assert_eq!(rows(&a.path().join("zeros.csv")).len(), rows(&b.path().join("zeros.csv")).len());
    let (ra, rb) = (rows(&a.path().join("zeros.csv")), rows(&b.path().join("zeros.csv")));
    for (x, y) in ra.iter().zip(&rb) {
        assert_eq!(x[1..7], y[1..7]);
    }
}

#[test]
fn linear_symmetric_scenario_succeeds_and_echoes_overrides() {
    let d = TempDir::new().unwrap();
    let o = fucik(d.path(), &["--samples", "200", "scenario", "linear-symmetric", "--param", "limit2=0.05"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let header = fs::read_to_string(d.path().join("zeros.csv")).unwrap();
    let config_line = header.lines().nth(1).unwrap();
    assert!(config_line.starts_with("# config: "));
    let cfg: Value = serde_json::from_str(config_line.trim_start_matches("# config: ")).unwrap();
    assert_eq!(cfg["parameters"]["limit2"].as_f64(), Some(0.05));
    assert_eq!(cfg["run"]["scenario"]["params"]["limit2"].as_f64(), Some(0.05));
    let rep = report(d.path());
    assert!(rep["result"]["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert!(d.path().join("orbit_omega_m_1_backward.csv").exists() || d.path().join("orbit_omega_p_2_backward.csv").exists());
}
