//! VaR backtest on the heteroscedastic return generator: realized
//! volatility pairs, rolling one-sided intervals and acceptance rates.

use predint::experiments::{build_var_pairs, var_backtest, BacktestConfig, BacktestReport, HeteroReturns, VarMethod};

pub fn run_example() -> predint::Result<BacktestReport> {
    let series = HeteroReturns::default().generate(2 * 10 * 80, 17)?;
    let pairs = build_var_pairs(&series, 10)?;
    assert!(pairs.windows(2).all(|w| w[0].end <= w[1].start));
    let cfg = BacktestConfig {
        alphas: vec![0.05, 0.1],
        methods: vec![VarMethod::Qe, VarMethod::MfbL1, VarMethod::MfbL2],
        b: 300,
        ..BacktestConfig::new(10, 34, 17)
    };
    var_backtest(&series, &cfg)
}

#[allow(dead_code)]
fn main() -> predint::Result<()> {
    let r = run_example()?;
    println!("{} pairs, {} test points", r.pairs, r.tests);
    for c in &r.cells {
        match c.acceptance_rate {
            Some(a) => println!("alpha {:<5} {:<7} acceptance {a:.3}", c.alpha, c.method.name()),
            None => println!("alpha {:<5} {:<7} failed: {}", c.alpha, c.method.name(), c.error.as_deref().unwrap_or("")),
        }
    }
    Ok(())
}
