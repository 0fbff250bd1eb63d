use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn psibeta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psibeta")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV with the schema line and header stripped.
fn csv_rows(text: &str, header: &str) -> Vec<Vec<String>> {
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# psibeta-approx v1"));
    assert_eq!(lines.next(), Some(header));
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

const VERIFY_HEADER: &str = "case,value,bound,pass";
const REPORT_HEADER: &str = "n,main_term,remainder_scale,lower,witness_best,upper,theta_bracket,flags";

#[test]
fn report_row_is_ordered() {
    let o = psibeta(&["report", "--psi", "power:r=2", "--omega", "omega-power:alpha=0.5", "--beta", "1", "--n", "8"]);
    assert!(o.status.success());
    let rows: Vec<Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    let (lo, wb, up) = (r["lower"].as_f64().unwrap(), r["witness_best"].as_f64().unwrap(), r["upper"].as_f64().unwrap());
    assert!(lo > 0.0 && lo <= wb * (1.0 + 1e-9) && wb <= up, "{r}");
}

#[test]
fn zero_phase_report_has_zero_lower() {
    let o = psibeta(&["report", "--beta", "0", "--n", "8"]);
    assert!(o.status.success());
    let rows: Vec<Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows[0]["lower"].as_f64(), Some(0.0));
    assert_eq!(rows[0]["main_term"].as_f64(), Some(0.0));
}

#[test]
fn malformed_spec_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rows.json");
    let o = psibeta(&["report", "--psi", "power:r=-1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    assert_eq!(psibeta(&["report", "--n", "8,4"]).status.code(), Some(1));
    assert_eq!(psibeta(&["verify"]).status.code(), Some(1));
    assert_eq!(psibeta(&["verify", "--suite", "nope"]).status.code(), Some(1));
}

#[test]
fn s_zero_suite() {
    let o = psibeta(&["verify", "--suite", "lemma1"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o), VERIFY_HEADER);
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|r| r[3] == "pass"));
}

#[test]
fn zeromean_suite() {
    let o = psibeta(&["verify", "--suite", "zeromean"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o), VERIFY_HEADER);
    assert_eq!(rows.len(), 12);
    for r in &rows {
        assert!(r[1].parse::<f64>().unwrap().abs() <= 1e-6);
    }
}

#[test]
fn log_log_rows_below_guard_are_skipped() {
    let o = psibeta(&["verify", "--suite", "example1", "--psi", "logpower:gamma=2", "--omega", "omega-loginv:alpha=1"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = csv_rows(&stdout(&o), VERIFY_HEADER);
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[3] == "skipped"));
}

#[test]
fn failed_assertion_exits_two() {
    // ω ≡ 0 leaves the witness without its 2n alternations
    let o = psibeta(&["report", "--n", "4", "--omega", "omega-power:alpha=1,scale=0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alternation"));
}

#[test]
fn sweep_rows_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = psibeta(&["sweep", "--n", "4..64", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    let rows = csv_rows(&text, REPORT_HEADER);
    let ns: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ns, ["4", "8", "16", "32", "64"]);
    // 17 significant digits
    assert!(rows[0][1].contains('e') && rows[0][1].split('e').next().unwrap().len() == 18);
}

#[test]
fn unwritable_output_is_an_io_error() {
    let o = psibeta(&["sweep", "--n", "4", "--out", "/nonexistent-dir/rows.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"psi": "logpower:gamma=2", "omega": "omega-loginv:alpha=1", "n": [4, 8], "format": "csv"}"#).unwrap();
    let o = psibeta(&["report", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o), REPORT_HEADER);
    assert_eq!(rows.len(), 2);
    // flags override the file
    let o = psibeta(&["report", "--config", cfg.to_str().unwrap(), "--n", "16", "--format", "json"]);
    let rows: Vec<Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows[0]["n"].as_u64(), Some(16));
    assert!(!Path::new("run.json").exists());
}
