//! A small synthetic coverage study and a two-point sweep over n,
//! written as the same CSV the `sweep` command emits.

use predint::experiments::{estimate_cvp, sweep_sample_sizes, write_sweep_csv, CoverageReport, EstimatorKind, Profile, SyntheticConfig};

pub fn run_example() -> predint::Result<(CoverageReport, String)> {
    let cfg = SyntheticConfig::new(Profile::Desk, 100, EstimatorKind::Kernel, 42).with_sizes(20, 500, 200);
    let report = estimate_cvp(&cfg)?;
    let (rows, _) = sweep_sample_sizes(&cfg.clone().with_sizes(10, 300, 100), &[50, 100], &[EstimatorKind::Kernel])?;
    let mut csv = Vec::new();
    write_sweep_csv(&rows, &mut csv)?;
    Ok((report, String::from_utf8(csv).expect("csv is utf-8")))
}

#[allow(dead_code)]
fn main() -> predint::Result<()> {
    let (report, csv) = run_example()?;
    for m in &report.methods {
        println!("{:<4} mean CVP {:.3}  var {:.5}  mean length {:.3}", m.name, m.cvp_mean, m.cvp_var, m.mean_length);
    }
    print!("{csv}");
    Ok(())
}
