//! Exit codes, output files and reproducibility of the `mzi-eraser` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mzi-eraser")).args(args).output().expect("spawn binary")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Small, fast settings shared by the heavier commands.
const FAST: [&str; 4] = ["--n_shots", "2", "--grid.beat_periods", "4"];

fn with_fast<'a>(args: &[&'a str]) -> Vec<&'a str> {
    args.iter().copied().chain(FAST).collect()
}

fn assert_same_tree(a: &Path, b: &Path) {
    let mut names: Vec<_> = fs::read_dir(a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?} differs");
    }
}

#[test]
fn eraser_default_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&with_fast(&["eraser", "--out", out, "--svg"]));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let s = json(&dir.path().join("eraser_summary.json"));
    for port in ["fit_a", "fit_b"] {
        assert!((s["bs"][port]["visibility"].as_f64().unwrap() - 1.0).abs() <= 1e-9);
        assert!(s["pbs"][port]["visibility"].as_f64().unwrap() <= 1e-9);
    }
    assert_eq!(s["pass"], Value::Bool(true));

    let csv = fs::read_to_string(dir.path().join("eraser.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("phi,I_A,I_B,mode"));
    assert_eq!(lines.count(), 2 * 24);
    assert!(fs::read_to_string(dir.path().join("eraser.svg")).unwrap().starts_with("<svg"));

    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "eraser");
    assert_eq!(m["resolved_config"]["n_shots"], 2);
    assert!(m["outputs"].as_array().unwrap().iter().any(|v| v == "eraser.csv"));
}

#[test]
fn phi_points_sets_row_count() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&with_fast(&["eraser", "--phi-points", "48", "--out", dir.path().to_str().unwrap()]));
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("eraser.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 48);
}

#[test]
fn missing_config_is_a_usage_error() {
    let o = run(&["eraser", "--config", "/definitely/not/here.json"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot read config"));
}

#[test]
fn bad_flags_and_values_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&run(&["eraser", "--no-such-flag"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["eraser", "--out", out, "--scheme.delta_f", "-1"])), 2);
    assert_eq!(code(&run(&["eraser", "--out", out, "--scheme.nonsense", "1"])), 2);
    assert_eq!(code(&run(&["local", "--out", out, "--scheme.analyzer_xi", "null"])), 2);
    assert_eq!(code(&run(&["local", "--out", out, "--scheme.combiner", "BS"])), 2);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn local_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&with_fast(&["local", "--out", dir.path().to_str().unwrap()]));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["local_s.csv", "local_i.csv", "local_s_filtered.csv", "local_i_filtered.csv"] {
        let text = fs::read_to_string(dir.path().join(f)).unwrap();
        assert!(text.starts_with("t,value\n"), "{f}");
    }
    let s = json(&dir.path().join("local_summary.json"));
    let k2 = s["kappa_sq"].as_f64().unwrap();
    let presets = s["presets"].as_array().unwrap();
    assert!(presets.len() >= 3);
    for p in presets {
        for key in ["filtered_mean_s", "filtered_mean_i"] {
            assert!((p[key].as_f64().unwrap() - k2).abs() <= 1e-9);
        }
    }
    let beat = s["beat_hz"].as_f64().unwrap();
    assert_eq!(s["spectrum_s"]["peak_hz"].as_f64().unwrap(), beat);
}

#[test]
fn local_zero_xi_trace_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&with_fast(&["local", "--out", dir.path().to_str().unwrap(), "--scheme.analyzer_xi", "0"]));
    assert_eq!(code(&o), 0);
    let s = json(&dir.path().join("local_summary.json"));
    assert!(s["spectrum_s"]["peak_hz"].is_null());
    assert!(s["spectrum_s"]["swing"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn correlate_summary_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&with_fast(&["correlate", "--out", dir.path().to_str().unwrap(), "--svg"]));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("correlate_summary.json"));
    assert!((s["amplitude"]["chsh_s"].as_f64().unwrap() - 2.828427).abs() <= 1e-6);
    assert!(s["amplitude"]["oracle_residual_max"].as_f64().unwrap() <= 1e-9);
    assert_eq!(s["amplitude"]["matches_oracle"], Value::Bool(true));
    assert_eq!(s["intensity"]["matches_oracle"], Value::Bool(false));
    let rows = fs::read_to_string(dir.path().join("surface.csv")).unwrap();
    assert_eq!(rows.lines().next(), Some("xi,theta,R"));
    assert_eq!(rows.lines().count(), 1 + 13 * 13);
    assert!(dir.path().join("surface_intensity_normalized.csv").exists());
}

#[test]
fn correlate_empty_grid_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "correlate",
        "--out",
        dir.path().to_str().unwrap(),
        "--scan",
        r#"{"XiTheta":{"xi":[],"theta":[0.0]}}"#,
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn correlate_poor_filter_violates_the_contract() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&with_fast(&[
        "correlate",
        "--out",
        dir.path().to_str().unwrap(),
        "--grid-points",
        "5",
        "--filter",
        r#"{"FIR":{"cutoff":15000.0,"n_taps":9}}"#,
    ]));
    assert_eq!(code(&o), 1);
    // outputs are still written for inspection
    let s = json(&dir.path().join("correlate_summary.json"));
    assert_eq!(s["pass"], Value::Bool(false));
}

#[test]
fn terms_table_and_json() {
    let o = run(&["terms"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("pairings (arm 1, arm 2): 8"));
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with("kept")).count(), 2);
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with("blocked")).count(), 2);

    let o = run(&["terms", "--json"]);
    assert_eq!(code(&o), 0);
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["pairings"].as_array().unwrap().len(), 8);
    let terms = doc["terms"].as_array().unwrap();
    let blocked: Vec<f64> = terms
        .iter()
        .filter(|t| t["class"] == "blocked")
        .map(|t| t["net_offset_hz"].as_f64().unwrap())
        .collect();
    assert_eq!(blocked.len(), 2);
    for off in blocked {
        assert!((off.abs() - 20e3).abs() < 1e-6);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let root = tempfile::tempdir().unwrap();
    for cmd in ["eraser", "local", "correlate"] {
        let a = root.path().join(format!("{cmd}_a"));
        let b = root.path().join(format!("{cmd}_b"));
        for d in [&a, &b] {
            let o = run(&with_fast(&[cmd, "--seed", "5", "--out", d.to_str().unwrap(), "--svg"]));
            assert_eq!(code(&o), 0);
        }
        assert_same_tree(&a, &b);
    }
}

#[test]
fn manifest_reproduces_the_run() {
    let root = tempfile::tempdir().unwrap();
    let a = root.path().join("a");
    let b = root.path().join("b");
    let o = run(&with_fast(&["eraser", "--phi-points", "17", "--scheme.phi", "0.3", "--out", a.to_str().unwrap()]));
    assert_eq!(code(&o), 0);
    let manifest = a.join("manifest.json");
    let o = run(&["eraser", "--config", manifest.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_same_tree(&a, &b);
}
