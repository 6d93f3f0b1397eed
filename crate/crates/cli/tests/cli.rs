use std::path::Path;
use std::process::{Command, Output};

fn microcc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_microcc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_names_every_scenario() {
    let o = microcc(&["list"]);
    assert!(o.status.success());
    let out = stdout(&o);
    for name in ["divcurl3", "counterexample", "garding", "two-chart"] {
        assert!(out.contains(name), "{out}");
    }
}

#[test]
fn show_prints_the_shipped_config() {
    let o = microcc(&["show", "tartar-const"]);
    assert!(o.status.success());
    let shown: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/tartar-const.json");
    let file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(shown, file);
}

#[test]
fn run_writes_outputs_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let (json, csv) = (dir.path().join("out/r.json"), dir.path().join("out/t.csv"));
    let o = microcc(&["run", "--builtin", "tartar-const", "--json", json.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict: pass"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["verdict"]["passed"], true);
    let lines = std::fs::read_to_string(&csv).unwrap().lines().count();
    assert_eq!(lines, 7);
}

#[test]
fn failing_checks_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let shown = microcc(&["show", "tartar-const"]);
    let mut cfg: serde_json::Value = serde_json::from_slice(&shown.stdout).unwrap();
    cfg["tolerances"]["final_gap"] = serde_json::json!(1e-30);
    let path = dir.path().join("strict.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    let o = microcc(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn bad_input_exits_one() {
    assert_eq!(microcc(&["run", "--builtin", "no-such-scenario"]).status.code(), Some(1));
    assert_eq!(microcc(&["run", "--config", "/nonexistent/cfg.json"]).status.code(), Some(1));
    assert_eq!(microcc(&["garding", "--symbol", "proj_first", "--quadform", "tartar", "--delta=-1"]).status.code(), Some(1));
}

#[test]
fn cone_reports_kernels_and_certificates() {
    let o = microcc(&["cone", "--symbol", "divcurl6", "--samples", "50"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("kernel dimensions: [3]"), "{}", stdout(&o));
    assert_eq!(microcc(&["cone", "--symbol", "divcurl6", "--samples", "50", "--quadform", "dot3"]).status.code(), Some(0));
    assert_eq!(microcc(&["cone", "--symbol", "zero", "--samples", "20", "--quadform", "square", "--dim", "1"]).status.code(), Some(2));
}

#[test]
fn garding_prints_a_report() {
    let o = microcc(&["garding", "--symbol", "proj_first", "--quadform", "proj_garding", "--delta", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((r["constant"].as_f64().unwrap() - 0.7).abs() < 0.05);
}
