use std::path::PathBuf;
use std::process::{Command, Output};

fn rnsfhe(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnsfhe")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn spec(name: &str) -> String {
    format!("{}/../../specs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

#[test]
fn analyze_prints_closed_forms() {
    let o = rnsfhe(&["analyze", "comm", "--tech", "ours", "--l", "30", "--r", "4"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "polynomials = 132");

    assert!(stdout(&rnsfhe(&["analyze", "bound"])).contains("max_chiplets = 4"));

    let out = stdout(&rnsfhe(&["analyze", "throughput"]));
    let ops: f64 = out.lines().find_map(|l| l.strip_prefix("ops_per_second = ")).unwrap().parse().unwrap();
    assert!((ops - 1432.0).abs() < 1.0, "{ops}");
}

#[test]
fn analyze_sweep_writes_csv() {
    let o = rnsfhe(&["analyze", "comm", "--tech", "ours", "--r", "4", "--sweep", "l=0..3", "--csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 5, "{text}");
    assert!(text.lines().last().unwrap().contains("24"));
}

#[test]
fn bad_input_exits_with_two() {
    let o = rnsfhe(&["analyze", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown formula"));
    assert_eq!(rnsfhe(&["simulate", "/no/such/spec.json"]).status.code(), Some(2));
}

#[test]
fn verify_catches_an_injected_fault() {
    assert!(rnsfhe(&["verify", "--scope", "kernels"]).status.success());
    let o = rnsfhe(&["verify", "--scope", "kernels", "--mutate", "shuffle-off-by-one"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAILED"));
}

#[test]
fn simulate_cross_checks_and_writes_outputs() {
    let (report, timeline) = (tmp("mono.json"), tmp("mono.csv"));
    let o = rnsfhe(&[
        "simulate",
        &spec("monolithic_exact.json"),
        "--cross-check",
        "--out",
        report.to_str().unwrap(),
        "--timeline",
        timeline.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("DIFF"));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["polynomials_transferred"], 0);
    let csv = std::fs::read_to_string(&timeline).unwrap();
    assert!(csv.starts_with("op,chiplet,start,end,kind,limb,digit,dst"));
}

#[test]
fn sweep_reports_ratios() {
    let o = rnsfhe(&["sweep", "--r", "4,8", "--L", "20", "--l-boot", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].trim_end().ends_with("1.0000"));
}
