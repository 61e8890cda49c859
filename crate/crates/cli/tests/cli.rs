use std::path::Path;
use std::process::{Command, Output};

fn chirplock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chirplock")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn reduce_builtin_reports_lock() {
    let v = stdout_json(&chirplock(&["reduce", "--builtin", "ex1"]));
    let theta0 = v["principal_Theta0"].as_f64().unwrap();
    assert!((theta0 + 0.1279).abs() < 1e-3);
    assert_eq!(v["exponents"]["A"]["ratio"], "2/3");
    assert_eq!(v["horizon"]["class"], "polynomial");
}

#[test]
fn simulate_writes_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let v = stdout_json(&chirplock(&[
        "simulate", "--builtin", "ex1", "--t-end", "200", "--seed", "3", "--out", out.to_str().unwrap(),
    ]));
    assert!(v["verdict"]["captured"].is_boolean());
    for f in ["manifest.json", "analysis.json", "scenario.json", "ensemble.json", "paths/path_0000.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn ensemble_prints_stats() {
    let v = stdout_json(&chirplock(&["ensemble", "--builtin", "ex1", "--t-end", "200", "--paths", "3", "--mu", "0"]));
    assert_eq!(v["path_count"], 3);
    assert_eq!(v["capture_fraction"], 1.0);
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = chirplock::harness::Scenario::builtin("ex2").unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, scenario.to_json().unwrap()).unwrap();
    let v = stdout_json(&chirplock(&["reduce", "--config", path.to_str().unwrap()]));
    assert_eq!(v["kappa"], 2);
}

#[test]
fn orbit_table_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.txt");
    let v = stdout_json(&chirplock(&["orbit", "--rho-min", "1", "--rho-max", "10", "--out", path.to_str().unwrap()]));
    assert!(v["max_energy_error"].as_f64().unwrap() < 1e-8);
    let table = chirplock::OrbitTable::read_text(std::fs::File::open(&path).unwrap()).unwrap();
    assert_eq!(table.phi_count(), 64);
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"name": "x", "unexpected": 1}"#).unwrap();
    assert_eq!(chirplock(&["reduce", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(chirplock(&["reduce", "--builtin", "ex9"]).status.code(), Some(2));
    assert_eq!(chirplock(&["reduce", "--config", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(chirplock(&["simulate", "--builtin", "ex1", "--t0", "0.5"]).status.code(), Some(2));
    assert_eq!(chirplock(&["figure", "fig9"]).status.code(), Some(2));
    assert_eq!(chirplock(&["orbit", "--rho-min", "5", "--rho-max", "1"]).status.code(), Some(2));
    assert!(!Path::new("ex1-path").exists());
}
