//! Runs every example's `run_example` and checks what it reports.

#[path = "../examples/classical_baselines.rs"]
mod classical_baselines;
#[path = "../examples/conformal.rs"]
mod conformal;
#[path = "../examples/conjecture_testing.rs"]
mod conjecture_testing;
#[path = "../examples/coverage_study.rs"]
mod coverage_study;
#[path = "../examples/distributions.rs"]
mod distributions;
#[path = "../examples/kernel_cdf.rs"]
mod kernel_cdf;
#[path = "../examples/model_free_bootstrap.rs"]
mod model_free_bootstrap;
#[path = "../examples/prediction_intervals.rs"]
mod prediction_intervals;
#[path = "../examples/quantile_regression.rs"]
mod quantile_regression;
#[path = "../examples/var_backtest.rs"]
mod var_backtest;

#[test]
fn kernel_cdf_example() {
    let s = kernel_cdf::run_example().unwrap();
    assert!(s.ks_p_value > 0.05);
    assert!((s.median_at_half - s.true_median_at_half).abs() < 0.1);
}

#[test]
fn quantile_regression_example() {
    let s = quantile_regression::run_example().unwrap();
    assert!((s.median_beta[1] - 2.0).abs() < 0.2, "{:?}", s.median_beta);
    assert!((s.cdf_at_prediction - 0.5).abs() <= 0.05);
    assert!(s.quartiles.0 < s.quartiles.1);
}

#[test]
fn prediction_intervals_example() {
    let rows = prediction_intervals::run_example().unwrap();
    assert_eq!(rows.len(), 7);
    for (name, pi) in &rows {
        assert!(pi.contains(1.0), "{name}: {}", pi.display());
        assert!(pi.length() > 0.5 && pi.length() < 3.0, "{name}: {}", pi.display());
    }
}

#[test]
fn conformal_example() {
    let s = conformal::run_example().unwrap();
    assert!(s.p_at_truth > 0.5 && s.p_far_out < 0.05);
    assert!((s.exact.lower - s.approx.lower).abs() < 0.1 && (s.exact.upper - s.approx.upper).abs() < 0.1);
    assert_eq!(s.lower.lower, f64::NEG_INFINITY);
    assert_eq!(s.upper.upper, f64::INFINITY);
    assert!(s.lower.upper < s.exact.upper && s.upper.lower > s.exact.lower);
}

#[test]
fn model_free_bootstrap_example() {
    let rows = model_free_bootstrap::run_example().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.interval.contains(1.0)));
}

#[test]
fn classical_baselines_example() {
    let (iid, ls, lev) = classical_baselines::run_example().unwrap();
    assert!((iid.lower + 21.01).abs() < 0.01 && (iid.upper - 23.01).abs() < 0.01);
    assert!((lev - 1.0 / 12.0).abs() < 1e-12);
    assert!(ls.contains(0.5 + 0.3 * 5.5));
}

#[test]
fn conjecture_testing_example() {
    let d = conjecture_testing::run_example().unwrap();
    let rejects: Vec<bool> = d.iter().map(|(_, d)| d.reject).collect();
    assert_eq!(rejects, [false, true, true, true]);
}

#[test]
fn coverage_study_example() {
    let (report, csv) = coverage_study::run_example().unwrap();
    assert_eq!(report.methods.len(), 3);
    assert!(report.methods.iter().all(|m| m.cvp_mean > 0.8));
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
}

#[test]
fn var_backtest_example() {
    let r = var_backtest::run_example().unwrap();
    assert_eq!(r.cells.len(), 6);
    assert!(r.cells.iter().all(|c| c.acceptance_rate.unwrap() > 0.7));
}

#[test]
fn distributions_example() {
    let (t, q, uniform, skewed) = distributions::run_example().unwrap();
    assert!((t - 2.570_582).abs() < 1e-5);
    assert!((q - 0.9).abs() < 0.05);
    assert!(uniform.p_value > 0.05 && skewed.p_value < 1e-6);
}
