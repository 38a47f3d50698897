use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn eddylab(args: &[&str], cfg: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eddylab"))
        .args(args)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn homogenize_shear() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "h.json",
        r#"{"a": {"a11": 0.5, "a12": 0.0, "a22": 0.5}, "eddy": {"kind": "shear", "n": 128}, "n": 128}"#,
    );
    let o = eddylab(&["homogenize"], &cfg, d.path());
    assert_eq!(o.status.code(), Some(0));
    let v = json(&d.path().join("homogenize.json"));
    let s = &v["result"]["sigma_sym"];
    assert!((s["a11"].as_f64().unwrap() - 1.5).abs() < 1e-3);
    assert!((s["a22"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    assert_eq!(v["checks"]["upper_bound"], Value::Bool(true));
    assert!(d.path().join("homogenize.csv").exists());
    assert!(d.path().join("homogenize.meta.json").exists());
}

#[test]
fn homogenize_zero_eddy_returns_a() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "h.json",
        r#"{"a": {"a11": 2.0, "a12": 0.5, "a22": 1.0}, "eddy": {"kind": "zero", "n": 16}, "n": 32, "format": "json"}"#,
    );
    assert_eq!(eddylab(&["homogenize"], &cfg, d.path()).status.code(), Some(0));
    let v = json(&d.path().join("homogenize.json"));
    assert_eq!(v["result"]["sigma_sym"], v["config"]["a"]);
    assert!(!d.path().join("homogenize.csv").exists());
}

#[test]
fn unknown_key_exits_one_and_names_it() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "h.json",
        r#"{"a": {"a11": 1.0, "a12": 0.0, "a22": 1.0}, "eddy": {"kind": "shear", "n": 16}, "resolution": 64}"#,
    );
    let o = eddylab(&["homogenize"], &cfg, d.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("resolution"));
}

#[test]
fn refusal_exits_two() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "h.json",
        r#"{"a": {"a11": 0.001, "a12": 0.0, "a22": 0.001}, "eddy": {"kind": "cellular", "n": 16}, "n": 16}"#,
    );
    assert_eq!(eddylab(&["homogenize"], &cfg, d.path()).status.code(), Some(2));
}

#[test]
fn core_zero_eddy_is_vanishing_exponential() {
    let d = tempfile::tempdir().unwrap();
    let scales: Vec<String> = (0..6)
        .map(|k| {
            format!(
                r#"{{"gamma": {}, "r": {}, "eddy": {{"kind": "zero", "n": 8}}}}"#,
                2f64.powi(k),
                if k == 0 { 1.0 } else { 4.0 }
            )
        })
        .collect();
    let text = format!(
        r#"{{"flow": {{"kappa": 1.0, "scales": [{}]}}, "steps": 5, "n": 16, "gamma_sweep": [2.0, 3.0]}}"#,
        scales.join(",")
    );
    let cfg = write(d.path(), "c.json", &text);
    assert_eq!(eddylab(&["core"], &cfg, d.path()).status.code(), Some(0));
    let v = json(&d.path().join("core.json"));
    assert_eq!(v["runs"][0]["regime"]["Ok"]["kind"], "vanishing_exponential");
    assert!(d.path().join("core_sweep_0.csv").exists() && d.path().join("core_sweep_1.csv").exists());
}

#[test]
fn exit_pde_and_simulate_pure_diffusion() {
    let d = tempfile::tempdir().unwrap();
    let flow = r#"{"kappa": 1.0, "scales": [{"gamma": 1.0, "r": 1.0, "eddy": {"kind": "zero", "n": 8}}]}"#;
    let cfg = write(
        d.path(),
        "e.json",
        &format!(r#"{{"flow": {flow}, "domain": {{"shape": "disk", "radius": 4.0}}, "n": 128}}"#),
    );
    assert_eq!(eddylab(&["exit-pde"], &cfg, d.path()).status.code(), Some(0));
    let m = json(&d.path().join("exit_pde.json"))["summary"]["mean_exit_time"].as_f64().unwrap();
    assert!((m - 2.0).abs() < 0.04);
    let cfg = write(
        d.path(),
        "s.json",
        &format!(r#"{{"flow": {flow}, "radii": [4.0], "sim": {{"n_particles": 2000}}}}"#),
    );
    assert_eq!(eddylab(&["simulate", "--seed", "3"], &cfg, d.path()).status.code(), Some(0));
    let v = json(&d.path().join("simulate.json"));
    assert_eq!(v["seed"], 3);
    let run = &v["runs"][0];
    let (mean, se) = (run["mean"].as_f64().unwrap(), run["stderr"].as_f64().unwrap());
    assert!((mean - 2.0).abs() < 3.0 * se);
    let csv = std::fs::read_to_string(d.path().join("simulate_r0.csv")).unwrap();
    assert!(csv.starts_with("particle_id,exit_time,censored,exit_face"));
    assert_eq!(csv.lines().count(), 2001);
}

#[test]
fn validate_meander_flow() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "v.json",
        r#"{"flow": {"kappa": 1.0, "scales": [
            {"gamma": 1.0, "r": 1.0, "eddy": {"kind": "meander", "n": 64}},
            {"gamma": 1.1, "r": 3.0, "eddy": {"kind": "meander", "n": 64}}]}}"#,
    );
    assert_eq!(eddylab(&["validate"], &cfg, d.path()).status.code(), Some(0));
    assert_eq!(json(&d.path().join("validate.json"))["report"]["compliant"], true);
    let bad = write(
        d.path(),
        "b.json",
        r#"{"flow": {"kappa": 1.0, "scales": [
            {"gamma": 1.0, "r": 1.0, "eddy": {"kind": "cellular", "n": 64}},
            {"gamma": 5.0, "r": 4.0, "eddy": {"kind": "cellular", "n": 64}}]}}"#,
    );
    assert_eq!(eddylab(&["validate"], &bad, d.path()).status.code(), Some(1));
}

#[test]
fn missing_config_is_a_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let o = eddylab(&["vcurve"], &d.path().join("nope.json"), d.path());
    assert_eq!(o.status.code(), Some(1));
}
