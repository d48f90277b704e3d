//! Conjecture tests about a future response, decided through the
//! matching prediction interval.

use predint::cdf_models::auto_kernel_estimator;
use predint::conjecture::{acceptance_rate, test_conjecture, Decision, NullSpec};
use predint::experiments::gen_synthetic;
use predint::pi_methods::{MethodSpec, MfbConfig};

pub fn run_example() -> predint::Result<Vec<(String, Decision)>> {
    let data = gen_synthetic(200, 0.2, 4)?;
    let est = auto_kernel_estimator(&data)?;
    let mfb = MethodSpec::Mfb(MfbConfig::new(500, 9));
    let nulls = [
        ("Y_f = 1.0", NullSpec::point(1.0)),
        ("Y_f = 2.5", NullSpec::point(2.5)),
        ("Y_f >= 1.8", NullSpec::at_least(1.8)),
        ("Y_f <= 0.0", NullSpec::at_most(0.0)),
    ];
    nulls
        .into_iter()
        .map(|(name, null)| Ok((name.to_string(), test_conjecture(&data, &[0.5], 0.05, null, &est, &mfb)?)))
        .collect()
}

#[allow(dead_code)]
fn main() -> predint::Result<()> {
    let decisions = run_example()?;
    for (name, d) in &decisions {
        println!("{name:<11} {:<7} interval {}", if d.reject { "reject" } else { "accept" }, d.interval_used.display());
    }
    let all: Vec<Decision> = decisions.into_iter().map(|d| d.1).collect();
    println!("acceptance rate: {:.2}", acceptance_rate(&all)?);
    Ok(())
}
