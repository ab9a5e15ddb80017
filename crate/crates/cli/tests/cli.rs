use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn iemlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iemlab"))
        .args(args)
        .env_remove("IEMLAB_PRECISION_BITS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn diagram_of_the_swap_has_one_vertex() {
    let o = iemlab(&["diagram", "--iem", &data("swap.json")]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("digraph"));
    let nodes = text.lines().filter(|l| l.contains("label=") && !l.contains("->")).count();
    assert_eq!(nodes, 1, "{text}");
}

#[test]
fn induct_csv_has_one_row_per_block() {
    let o = iemlab(&["induct", "--iem", &data("golden.json"), "--blocks", "50", "--emit", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("n,"));
    assert_eq!(lines.count(), 50);
}

#[test]
fn solve_writes_a_report_and_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let o = iemlab(&[
        "solve",
        "--iem",
        &data("golden.json"),
        "--fn",
        &data("sawtooth2.json"),
        "--orbit",
        "2000",
        "--out",
        &out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["status"], "ok");
    let majorant = report["result"]["certificate"]["majorant"].as_f64().unwrap();
    assert!(majorant.is_finite() && majorant > 0.0);
    let psi = std::fs::read_to_string(dir.path().join("psi.csv")).unwrap();
    assert_eq!(psi.lines().count(), 2001);
}

#[test]
fn check_lists_diagnostics_and_fails() {
    let o = iemlab(&["solve", "--benchmark", "d4", "--emit", "dot", "--check"]);
    assert!(!o.status.success());
    let text = stdout(&o);
    assert!(text.contains("format:"), "{text}");
    assert!(text.contains("function:"), "{text}");
}

#[test]
fn errors_go_to_stderr_with_a_class() {
    let o = iemlab(&["solve", "--benchmark", "golden", "--fn", &data("planted3.json")]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error ["));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["status"], "error");
}

#[test]
fn sweeps_write_one_directory_per_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_string_lossy().into_owned();
    let o = iemlab(&[
        "roth", "--iem", &data("golden.json"), &data("d4.json"), "--depth", "16", "--out", &out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for stem in ["golden", "d4"] {
        assert!(dir.path().join(stem).join("report.json").exists());
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["roth", "--benchmark", "d3", "--depth", "12", "--emit", "csv"];
    assert_eq!(stdout(&iemlab(&args)), stdout(&iemlab(&args)));
}

#[test]
fn precision_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_iemlab"))
        .args(["selfsim", "--benchmark", "golden"])
        .env("IEMLAB_PRECISION_BITS", "128")
        .output()
        .unwrap();
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report["config"]["precision_bits"], 128);
}
