//! End-to-end runs of the `predint` binary.

use std::path::Path;
use std::process::{Command, Output};

fn predint(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_predint")).args(args).current_dir(dir).output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn degenerate_csv(dir: &Path) {
    std::fs::write(dir.join("d.csv"), "x1,y\n0.1,3\n0.4,3\n0.6,3\n0.9,3\n0.2,3\n0.7,3\n0.3,3\n0.8,3\n0.5,3\n0.45,3\n").unwrap();
}

#[test]
fn predict_on_degenerate_data_prints_point_interval() {
    let dir = tempfile::tempdir().unwrap();
    degenerate_csv(dir.path());
    for method in ["qe", "mfb", "cp"] {
        let out = predint(&["predict", "--data", "d.csv", "--xf", "0.5", "--alpha", "0.2", "--method", method, "--estimator", "kernel", "--seed", "7", "--b", "200"], dir.path());
        assert_eq!(out.status.code(), Some(0), "{method}: {}", text(&out.stderr));
        assert_eq!(text(&out.stdout).trim(), "[3, 3]", "{method}");
    }
}

#[test]
fn usage_errors_exit_two_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    degenerate_csv(dir.path());
    let out = predint(&["predict", "--data", "d.csv", "--xf", "0.5", "--alpha", "1.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains("alpha must be in (0,1)"), "{err}");
    assert_eq!(err.trim().lines().count(), 1);
    assert_eq!(predint(&["predict", "--data", "d.csv", "--xf", "0.5", "--frob"], dir.path()).status.code(), Some(2));
    assert_eq!(predint(&[], dir.path()).status.code(), Some(2));
}

#[test]
fn short_series_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("r.csv"), "timestamp,price\n2024-01-02T09:31:00,100\n2024-01-02T09:32:00,101\n2024-01-02T09:33:00,99\n").unwrap();
    let out = predint(&["var-backtest", "--data", "r.csv", "--m", "30"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stderr).contains("need at least 4m = 120"), "{}", text(&out.stderr));
}

#[test]
fn sweep_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| ["sweep", "--n-list", "30,50", "--estimators", "kernel", "--k", "3", "--m", "100", "--b", "100", "--seed", "9", "--out", out];
    assert_eq!(predint(&args("a.csv"), dir.path()).status.code(), Some(0));
    assert_eq!(predint(&[&["--threads", "2"][..], &args("b.csv")].concat(), dir.path()).status.code(), Some(0));
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    assert!(text(&a).starts_with("n,estimator,method,coverage_mean,coverage_var_scaled,mean_length\n"));
}

#[test]
fn reports_echo_their_config() {
    let dir = tempfile::tempdir().unwrap();
    degenerate_csv(dir.path());
    let out = predint(&["simulate-coverage", "--n", "40", "--k", "3", "--m", "50", "--b", "100", "--seed", "5", "--methods", "qe,mfb", "--out", "r.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    let cfg: predint::experiments::SyntheticConfig = serde_json::from_value(v["config"].clone()).unwrap();
    assert_eq!((cfg.n, cfg.k, cfg.m, cfg.b, cfg.seed), (40, 3, 50, 100, 5));
    assert_eq!(v["profile"], "custom");
    assert!(v["runtime_s"].is_null() && v["version"].is_string());
    assert_eq!(v["methods"][0]["cvp_values"].as_array().unwrap().len(), 3);

    let out = predint(&["conjecture", "--data", "d.csv", "--xf", "0.5", "--null", "at-least", "--y0", "4", "--method", "qe", "--alpha", "0.2", "--out", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stdout).starts_with("reject"));
    let report: predint::cli::ConjectureReport = serde_json::from_slice(&std::fs::read(dir.path().join("c.json")).unwrap()).unwrap();
    assert_eq!(report.config.y0, 4.0);
    assert_eq!(report.decision.interval_used.lower, f64::NEG_INFINITY);
}
