//! Reproducible pipelines: the synthetic coverage study and the VaR backtest.

mod backtest;
mod coverage;
mod returns;
mod synthetic;

pub use backtest::{var_backtest, var_backtest_with_oracle, BacktestCell, BacktestConfig, BacktestReport, VarMethod};
pub use coverage::{
    default_sweep_sizes, estimate_cvp, study_estimator, study_intervals, sweep_sample_sizes, tower_check, write_sweep_csv,
    CoverageReport, EstimatorKind, MethodReport, Profile, StudyMethod, SweepRow, SyntheticConfig, TowerCheck, MAX_ATTEMPTS,
};
pub use returns::{
    build_var_pairs, realized_volatility, worst_cumulative_return, HeteroReturns, ReturnsSeries, UnitPathBank, VarPair,
    SESSION_TRIM_BARS,
};
pub use synthetic::{gen_synthetic, SyntheticModel, DEFAULT_SIGMA, NOISE_DF};
