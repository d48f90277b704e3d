//! Rolling one-sided VaR backtest on realized-volatility pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdf_models::{Dataset, EstimatorSpec};
use crate::conjecture::{decide, NullSpec};
use crate::error::{check_alpha, domain, Result};
use crate::experiments::coverage::{study_estimator, EstimatorKind};
use crate::experiments::returns::{build_var_pairs, ReturnsSeries, VarPair};
use crate::pi_methods::{
    cp_interval, mfb_interval, qe_interval, CandidateGrid, CpMode, MethodTag, MfbConfig, PredictionInterval, Predictor, Side,
};
use crate::rng::derive_seed_path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarMethod {
    #[serde(rename = "QE")]
    Qe,
    #[serde(rename = "MFB-L1")]
    MfbL1,
    #[serde(rename = "MFB-L2")]
    MfbL2,
    #[serde(rename = "CP")]
    Cp,
    /// The true conditional quantile, supplied by the caller.
    #[serde(rename = "ORACLE")]
    Oracle,
}

impl VarMethod {
    pub fn name(self) -> &'static str {
        match self {
            VarMethod::Qe => "QE",
            VarMethod::MfbL1 => "MFB-L1",
            VarMethod::MfbL2 => "MFB-L2",
            VarMethod::Cp => "CP",
            VarMethod::Oracle => "ORACLE",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestConfig {
    /// Bars per half block.
    pub m: usize,
    pub alphas: Vec<f64>,
    /// Training pairs per fit.
    pub window: usize,
    pub methods: Vec<VarMethod>,
    pub estimator: EstimatorKind,
    /// Bootstrap replicates for MFB.
    pub b: usize,
    pub seed: u64,
    /// `None` picks the default for the estimator and window.
    pub cp_mode: Option<CpMode>,
}

impl BacktestConfig {
    pub fn new(m: usize, window: usize, seed: u64) -> Self {
        Self {
            m,
            alphas: vec![0.01, 0.05, 0.1],
            window,
            methods: vec![VarMethod::Qe, VarMethod::MfbL1, VarMethod::MfbL2, VarMethod::Cp],
            estimator: EstimatorKind::Kernel,
            b: 500,
            seed,
            cp_mode: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.methods.is_empty() {
            return domain("backtest needs at least one alpha and one method");
        }
        for &a in &self.alphas {
            check_alpha(a)?;
        }
        if self.window < 2 {
            return domain(format!("window must hold at least 2 pairs, got {}", self.window));
        }
        if self.estimator == EstimatorKind::Oracle {
            return domain("use the ORACLE method rather than the oracle estimator");
        }
        Ok(())
    }
}

/// Outcome for one `(alpha, method)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestCell {
    pub alpha: f64,
    pub method: VarMethod,
    /// Share of test points where the realized worst return stayed at or
    /// above the predicted VaR. Empty when the method failed.
    pub acceptance_rate: Option<f64>,
    pub tests: usize,
    pub failures: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub config: BacktestConfig,
    pub cells: Vec<BacktestCell>,
    pub pairs: usize,
    pub tests: usize,
    pub session_trimmed: bool,
    pub symbol: Option<String>,
    pub version: String,
    pub runtime_s: Option<f64>,
}

impl BacktestReport {
    pub fn cell(&self, alpha: f64, method: VarMethod) -> Option<&BacktestCell> {
        self.cells.iter().find(|c| c.alpha == alpha && c.method == method)
    }
}

/// Caller-supplied VaR: the lower `alpha` quantile of `t` for a pair.
pub type OracleFn<'a> = dyn Fn(&VarPair, f64) -> Result<f64> + Sync + 'a;

pub fn var_backtest(series: &ReturnsSeries, cfg: &BacktestConfig) -> Result<BacktestReport> {
    var_backtest_with_oracle(series, cfg, None)
}

/// Fits on the `window` pairs before each test pair, predicts the lower
/// `alpha` bound of `t` given `v`, and accepts when the realized `t` is at
/// or above it. Rolls forward one pair at a time.
pub fn var_backtest_with_oracle(series: &ReturnsSeries, cfg: &BacktestConfig, oracle: Option<&OracleFn>) -> Result<BacktestReport> {
    cfg.validate()?;
    if cfg.methods.contains(&VarMethod::Oracle) && oracle.is_none() {
        return domain("ORACLE method requested without an oracle");
    }
    let pairs = build_var_pairs(series, cfg.m)?;
    if pairs.len() <= cfg.window {
        return domain(format!(
            "{} pairs available; a window of {} needs at least {}",
            pairs.len(),
            cfg.window,
            cfg.window + 1
        ));
    }
    let tests: Vec<usize> = (cfg.window..pairs.len()).collect();
    // outcomes[test][cell]: accepted or an error message.
    let outcomes: Vec<Vec<std::result::Result<bool, String>>> = tests
        .par_iter()
        .map(|&t| test_point(&pairs, t, cfg, oracle))
        .collect();

    let mut cells = Vec::new();
    for (ai, &alpha) in cfg.alphas.iter().enumerate() {
        for (mi, &method) in cfg.methods.iter().enumerate() {
            let j = ai * cfg.methods.len() + mi;
            let mut accepted = 0;
            let mut failures = 0;
            let mut error = None;
            for o in &outcomes {
                match &o[j] {
                    Ok(a) => accepted += *a as usize,
                    Err(e) => {
                        failures += 1;
                        error.get_or_insert_with(|| e.clone());
                    }
                }
            }
            let done = outcomes.len() - failures;
            cells.push(BacktestCell {
                alpha,
                method,
                acceptance_rate: (failures == 0).then(|| accepted as f64 / done as f64),
                tests: outcomes.len(),
                failures,
                error,
            });
        }
    }
    Ok(BacktestReport {
        config: cfg.clone(),
        cells,
        pairs: pairs.len(),
        tests: tests.len(),
        session_trimmed: series.has_sessions(),
        symbol: series.symbol.clone(),
        version: env!("CARGO_PKG_VERSION").into(),
        runtime_s: None,
    })
}

fn test_point(pairs: &[VarPair], t: usize, cfg: &BacktestConfig, oracle: Option<&OracleFn>) -> Vec<std::result::Result<bool, String>> {
    let train = &pairs[t - cfg.window..t];
    let target = pairs[t];
    let data = Dataset::univariate(train.iter().map(|p| p.v).collect(), train.iter().map(|p| p.t).collect());
    let needs_fit = cfg.methods.iter().any(|&m| m != VarMethod::Oracle);
    let est = match (&data, needs_fit) {
        (Ok(d), true) => study_estimator(cfg.estimator, d).map_err(|e| e.to_string()),
        (Err(e), _) => Err(e.to_string()),
        _ => Ok(None),
    };
    // Keep the test covariate inside the training range, and widen a kernel
    // bandwidth that would leave it in a gap with no kernel mass.
    let (lo, hi) = train.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.v), b.max(p.v)));
    let x_f = [target.v.clamp(lo, hi)];
    let gap = train.iter().map(|p| (p.v - x_f[0]).abs()).fold(f64::INFINITY, f64::min);
    let est = est.map(|e| match e {
        Some(EstimatorSpec::Kernel { h, h0, kernel }) if gap >= h => {
            Some(EstimatorSpec::Kernel { h: gap * 1.05, h0, kernel })
        }
        other => other,
    });
    let fitted = match (&est, &data) {
        (Ok(Some(e)), Ok(d)) if cfg.methods.contains(&VarMethod::Qe) => Some(e.fit(d).map_err(|e| e.to_string())),
        _ => None,
    };

    let mut out = Vec::with_capacity(cfg.alphas.len() * cfg.methods.len());
    for (ai, &alpha) in cfg.alphas.iter().enumerate() {
        for (mi, &method) in cfg.methods.iter().enumerate() {
            let interval = || -> std::result::Result<PredictionInterval, String> {
                if method == VarMethod::Oracle {
                    let c = oracle.expect("checked above")(&target, alpha).map_err(|e| e.to_string())?;
                    return PredictionInterval::new(c, f64::INFINITY, 1.0 - alpha, MethodTag::Qe, None).map_err(|e| e.to_string());
                }
                let est = est.clone()?.expect("fitted estimator");
                let data = data.as_ref().map_err(|e| e.to_string())?;
                let seed = derive_seed_path(cfg.seed, &[t as u64, ai as u64, mi as u64]);
                let r = match method {
                    VarMethod::Qe => qe_interval(fitted.as_ref().expect("fitted for QE").as_ref().map_err(|e| e.clone())?, &x_f, alpha, Side::Upper),
                    VarMethod::Cp => {
                        let mode = cfg.cp_mode.unwrap_or_else(|| CpMode::default_for(&est, data.n()));
                        cp_interval(data, &x_f, alpha, &est, Side::Upper, mode, &CandidateGrid::default())
                    }
                    VarMethod::MfbL1 | VarMethod::MfbL2 => {
                        let predictor = if method == VarMethod::MfbL1 { Predictor::Median } else { Predictor::Mean };
                        let mfb = MfbConfig::new(cfg.b, seed).with_predictor(predictor);
                        mfb_interval(data, &x_f, alpha, &est, &mfb, Side::Upper).map(|r| r.0)
                    }
                    VarMethod::Oracle => unreachable!(),
                };
                r.map_err(|e| e.to_string())
            };
            out.push(
                interval()
                    .and_then(|pi| decide(NullSpec::at_most(target.t), pi, alpha).map_err(|e| e.to_string()))
                    .map(|d| !d.reject),
            );
        }
    }
    out
}
