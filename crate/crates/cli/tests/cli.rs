use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn teichlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teichlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn run_config(cmd: &str, config: &str, out: &Path) -> Output {
    let path = configs().join(config);
    teichlab(&[cmd, "--config", path.to_str().unwrap()], out)
}

fn run_inline(cmd: &str, config: &str, dir: &TempDir) -> Output {
    let path = dir.path().join(format!("{cmd}.json"));
    fs::write(&path, config).unwrap();
    teichlab(&[cmd, "--config", path.to_str().unwrap()], &dir.path().join("out"))
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn rho_round_trips() {
    let dir = TempDir::new().unwrap();
    let o = run_config("rho", "rho.json", dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("rho.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("input,t,height,round_trip_error"));
    assert_eq!(lines.count(), 4);
}

#[test]
fn audit_constants_passes() {
    let dir = TempDir::new().unwrap();
    let o = run_config("audit-constants", "audit.json", dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let a = json(&dir.path().join("audit.json"));
    assert_eq!(a["pass"], true);
    assert!(a["audit"]["max_residual"].as_f64().unwrap() < 1e-6);
}

#[test]
fn zero_field_audit_gives_zero_constants() {
    let dir = TempDir::new().unwrap();
    let o = run_inline("audit-constants", r#"{"audit": {"field": "zero"}}"#, &dir);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let a = json(&dir.path().join("out/audit.json"));
    for p in a["audit"]["torus"]["pairings"].as_array().unwrap() {
        assert_eq!(p[0].as_f64().unwrap(), 0.0);
        assert_eq!(p[1].as_f64().unwrap(), 0.0);
    }
}

#[test]
fn certify_lift_is_certified() {
    let dir = TempDir::new().unwrap();
    let o = run_config("certify", "certify_lift.json", dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("certificate.json").exists());
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.lines().count() > 1);
}

#[test]
fn hypothesis_violation_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let o = run_config("certify", "certify_bad_k.json", dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("hypothesis"));
}

#[test]
fn malformed_configs_exit_2() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run_inline("rho", "{ not json", &dir)), 2);
    assert_eq!(code(&run_inline("rho", r#"{"heights": [1.0], "bogus": 1}"#, &dir)), 2);
    assert_eq!(code(&run_inline("family", r#"{"family": {"kind": "disk", "t0": 1.5}}"#, &dir)), 2);
    let missing = teichlab(&["rho", "--config", "/nonexistent/rho.json"], dir.path());
    assert_eq!(code(&missing), 2);
}

#[test]
fn family_reports_members() {
    let dir = TempDir::new().unwrap();
    let o = run_config("family", "family_disk.json", dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let f = json(&dir.path().join("family.json"));
    assert_eq!(f["members"].as_array().unwrap().len(), 5);

    let dir = TempDir::new().unwrap();
    let o = run_config("family", "family_string.json", dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn separate_finds_a_witness() {
    let dir = TempDir::new().unwrap();
    let o = run_config("separate", "separate.json", dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("separation.json"));
    assert!(!s["certificate"].is_null());
}

#[test]
fn separate_equal_parameters_has_no_certificate() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "family": {"kind": "disk", "region": {"kind": "disk", "center": [1.5, 0.0], "radius": 0.4}, "t0": 0.5},
        "lambda1": [0.7, 0.1], "lambda2": [0.7, 0.1], "threshold": 1e-8
    }"#;
    let o = run_inline("separate", cfg, &dir);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&dir.path().join("out/separation.json"));
    assert!(s["certificate"].is_null());
}

#[test]
fn recover_l4_within_tolerance() {
    let dir = TempDir::new().unwrap();
    let o = run_config("recover", "recover_l4.json", dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("recovery.json"));
    assert!(r["max_error"].as_f64().unwrap() <= 1e-6);
    let csv = fs::read_to_string(dir.path().join("pairings.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "string,re_pairing,im_pairing");
}

const SMALL_RADIAL: &str = r#"{
    "field": {"kind": "radial_stretch", "dilatation": 2.0, "radius": 1.0},
    "n": 256,
    "box": {"half": 2.0},
    "check_tol": 0.01
}"#;

#[test]
fn solve_writes_grid_and_reloads_it() {
    let dir = TempDir::new().unwrap();
    let o = run_inline("solve", SMALL_RADIAL, &dir);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    let grid = out.join("grid.qcgrid");
    let first = json(&out.join("solve_report.json"));
    assert_eq!(first["source"], "solver");
    assert!(first["oracle_error"].as_f64().unwrap() < 0.01);

    let cfg = dir.path().join("solve.json");
    let again = dir.path().join("again");
    let o = teichlab(
        &["solve", "--config", cfg.to_str().unwrap(), "--grid-in", grid.to_str().unwrap()],
        &again,
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let second = json(&again.join("solve_report.json"));
    assert_eq!(second["source"], "grid_in");
    assert_eq!(first["oracle_error"], second["oracle_error"]);
}

#[test]
fn outputs_are_deterministic() {
    for (cmd, cfg, file) in [
        ("rho", "rho.json", "rho.csv"),
        ("recover", "recover_l4.json", "pairings.csv"),
        ("family", "family_disk.json", "family.json"),
    ] {
        let a = TempDir::new().unwrap();
        let b = TempDir::new().unwrap();
        assert_eq!(code(&run_config(cmd, cfg, a.path())), 0);
        assert_eq!(code(&run_config(cmd, cfg, b.path())), 0);
        let x = fs::read(a.path().join(file)).unwrap();
        let y = fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{cmd} output differs between runs");
    }
}
