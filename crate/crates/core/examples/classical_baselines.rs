//! The Gaussian baselines: the Student-t interval for i.i.d. data and the
//! least-squares interval for a linear model.

use predint::cdf_models::Dataset;
use predint::pi_methods::{baseline_ls_interval, baseline_t_interval, leverage, PredictionInterval, Side};

pub fn run_example() -> predint::Result<(PredictionInterval, PredictionInterval, f64)> {
    let iid = baseline_t_interval(&[0.0, 2.0], 0.05, Side::Two)?;
    // Design with an explicit intercept column.
    let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![1.0, i as f64]).collect();
    let y: Vec<f64> = (0..12).map(|i| 0.5 + 0.3 * i as f64 + if i % 2 == 0 { 0.2 } else { -0.2 }).collect();
    let data = Dataset::from_rows(&rows, y)?;
    let ls = baseline_ls_interval(&data, &[1.0, 5.5], 0.05, Side::Two)?;
    Ok((iid, ls, leverage(&data, &[1.0, 5.5])?))
}

#[allow(dead_code)]
fn main() -> predint::Result<()> {
    let (iid, ls, lev) = run_example()?;
    println!("t interval from y = {{0, 2}}: {}", iid.display());
    println!("LS interval at x = 5.5: {} (leverage {lev:.4})", ls.display());
    Ok(())
}
