//! QE, CP and MFB intervals side by side on one synthetic sample, with
//! the true conditional interval for reference.

use predint::cdf_models::{auto_kernel_estimator, EstimatorSpec};
use predint::experiments::{gen_synthetic, SyntheticModel};
use predint::pi_methods::{build_interval, qe_interval, MethodSpec, MfbConfig, PredictionInterval, Side};

pub fn run_example() -> predint::Result<Vec<(String, PredictionInterval)>> {
    let data = gen_synthetic(150, 0.2, 3)?;
    let x_f = [0.5];
    let alpha = 0.05;
    let mut out = Vec::new();
    for est in [auto_kernel_estimator(&data)?, EstimatorSpec::quantile_regression()] {
        for method in [MethodSpec::Qe, MethodSpec::cp(), MethodSpec::Mfb(MfbConfig::new(500, 1))] {
            let pi = build_interval(&data, &x_f, alpha, Side::Two, &est, &method)?;
            out.push((format!("{} / {}", est.name(), method.label()), pi));
        }
    }
    out.push(("oracle".into(), qe_interval(&SyntheticModel::default(), &x_f, alpha, Side::Two)?));
    Ok(out)
}

#[allow(dead_code)]
fn main() -> predint::Result<()> {
    for (name, pi) in run_example()? {
        println!("{name:<14} [{:.3}, {:.3}]  length {:.3}", pi.lower, pi.upper, pi.length());
    }
    Ok(())
}
