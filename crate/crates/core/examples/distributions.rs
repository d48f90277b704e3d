//! Numerical building blocks: Student-t quantiles, empirical quantiles and
//! the KS uniformity test.

use predint::rng::{open_unit, seeded};
use predint::stat_kernels::{empirical_quantile, ks_uniform_test, t_quantile, KsResult};

pub fn run_example() -> predint::Result<(f64, f64, KsResult, KsResult)> {
    let t975 = t_quantile(0.975, 5)?;
    let mut rng = seeded(1);
    let u: Vec<f64> = (0..500).map(|_| open_unit(&mut rng)).collect();
    let skewed: Vec<f64> = u.iter().map(|v| v * v).collect();
    Ok((t975, empirical_quantile(&u, 0.9)?, ks_uniform_test(&u)?, ks_uniform_test(&skewed)?))
}

#[allow(dead_code)]
fn main() -> predint::Result<()> {
    let (t, q, uniform, skewed) = run_example()?;
    println!("t_5 quantile at 0.975: {t:.4}");
    println!("empirical 0.9 quantile of 500 uniforms: {q:.3}");
    println!("KS uniform sample: D = {:.3}, p = {:.3}", uniform.statistic, uniform.p_value);
    println!("KS squared uniforms: D = {:.3}, p = {:.2e}", skewed.statistic, skewed.p_value);
    Ok(())
}
