//! Distributional conformal prediction: p-values over a candidate grid,
//! exact versus rank-approximation mode, and one-sided intervals.

use predint::cdf_models::EstimatorSpec;
use predint::experiments::gen_synthetic;
use predint::pi_methods::{cp_interval, cp_p_values, CandidateGrid, CpMode, PredictionInterval, Side};

pub struct CpSummary {
    pub exact: PredictionInterval,
    pub approx: PredictionInterval,
    pub lower: PredictionInterval,
    pub upper: PredictionInterval,
    pub p_at_truth: f64,
    pub p_far_out: f64,
}

pub fn run_example() -> predint::Result<CpSummary> {
    let data = gen_synthetic(250, 0.2, 8)?;
    let est = EstimatorSpec::kernel(0.1, 0.08);
    let x_f = [0.5];
    let grid = CandidateGrid::default();
    let p = cp_p_values(&data, &x_f, &est, Side::Two, CpMode::Exact, &[1.0, 3.0])?;
    Ok(CpSummary {
        exact: cp_interval(&data, &x_f, 0.1, &est, Side::Two, CpMode::Exact, &grid)?,
        approx: cp_interval(&data, &x_f, 0.1, &est, Side::Two, CpMode::RankApprox, &grid)?,
        lower: cp_interval(&data, &x_f, 0.1, &est, Side::Lower, CpMode::Exact, &grid)?,
        upper: cp_interval(&data, &x_f, 0.1, &est, Side::Upper, CpMode::Exact, &grid)?,
        p_at_truth: p[0],
        p_far_out: p[1],
    })
}

#[allow(dead_code)]
fn main() -> predint::Result<()> {
    let s = run_example()?;
    println!("p-value at y = 1 (conditional median): {:.3}; at y = 3: {:.3}", s.p_at_truth, s.p_far_out);
    println!("90% exact:        {}", s.exact.display());
    println!("90% rank-approx:  {}", s.approx.display());
    println!("90% lower-sided:  {}", s.lower.display());
    println!("90% upper-sided:  {}", s.upper.display());
    Ok(())
}
