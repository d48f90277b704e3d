//! Linear quantile regression: one check-loss fit, then the CDF built from
//! a grid of quantile levels.

use predint::cdf_models::{default_tau_grid, fit_qr_cdf, fit_quantile_regression, CdfModel, Dataset};

pub struct QrSummary {
    pub median_beta: Vec<f64>,
    pub objective: f64,
    pub cdf_at_prediction: f64,
    pub quartiles: (f64, f64),
}

pub fn run_example() -> predint::Result<QrSummary> {
    // y = 1 + 2x with a few outliers that the median fit should shrug off.
    let x: Vec<f64> = (0..40).map(|i| i as f64 / 39.0).collect();
    let mut y: Vec<f64> = x.iter().enumerate().map(|(i, v)| 1.0 + 2.0 * v + 0.05 * ((i * 7 % 11) as f64 - 5.0)).collect();
    y[3] += 8.0;
    y[30] -= 6.0;
    let data = Dataset::univariate(x, y)?;

    let fit = fit_quantile_regression(&data, 0.5)?;
    let model = fit_qr_cdf(&data, &default_tau_grid())?;
    let at = [0.5];
    Ok(QrSummary {
        median_beta: fit.beta.clone(),
        objective: fit.objective,
        cdf_at_prediction: model.cdf(fit.beta[0] + fit.beta[1] * 0.5, &at)?,
        quartiles: (model.quantile(0.25, &at)?, model.quantile(0.75, &at)?),
    })
}

#[allow(dead_code)]
fn main() -> predint::Result<()> {
    let s = run_example()?;
    println!("median fit: intercept {:.3}, slope {:.3} (check loss {:.4})", s.median_beta[0], s.median_beta[1], s.objective);
    println!("F(median fit | x = 0.5) = {:.2}", s.cdf_at_prediction);
    println!("quartiles at x = 0.5: [{:.3}, {:.3}]", s.quartiles.0, s.quartiles.1);
    Ok(())
}
