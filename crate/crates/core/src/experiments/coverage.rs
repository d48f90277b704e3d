//! Monte Carlo coverage study on the synthetic model.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdf_models::{auto_kernel_estimator, CdfModel, Dataset, EstimatorSpec};
use crate::error::{check_alpha, domain, Error, Result};
use crate::experiments::{gen_synthetic, SyntheticModel, DEFAULT_SIGMA};
use crate::pi_methods::{
    cp_interval, mfb_interval, qe_interval, CandidateGrid, CpMode, MfbConfig, MfbVariant, PredictionInterval, Predictor,
    Scheme, Side,
};
use crate::rng::{derive_seed, derive_seed_path, seeded};

/// Attempts per replication before the study gives up.
pub const MAX_ATTEMPTS: usize = 3;

/// Scale of a study: `(K, M, B)` = datasets, future draws per dataset,
/// bootstrap replicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `(100, 1000, 500)`.
    #[default]
    Desk,
    /// `(200, 3000, 1000)`.
    Paper,
    /// Explicit sizes.
    Custom,
}

impl Profile {
    pub fn sizes(self) -> Option<(usize, usize, usize)> {
        match self {
            Profile::Desk => Some((100, 1000, 500)),
            Profile::Paper => Some((200, 3000, 1000)),
            Profile::Custom => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    /// Kernel CDF with bandwidths chosen per dataset by the KS criterion.
    Kernel,
    /// Quantile-regression CDF on the default τ grid.
    Qr,
    /// The true conditional law; QE only.
    Oracle,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Kernel => "kernel",
            EstimatorKind::Qr => "qr",
            EstimatorKind::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StudyMethod {
    #[serde(rename = "QE")]
    Qe,
    #[serde(rename = "CP")]
    Cp,
    #[serde(rename = "MFB")]
    Mfb,
}

impl StudyMethod {
    pub fn name(self) -> &'static str {
        match self {
            StudyMethod::Qe => "QE",
            StudyMethod::Cp => "CP",
            StudyMethod::Mfb => "MFB",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub n: usize,
    pub sigma: f64,
    pub alpha: f64,
    /// Number of simulated datasets.
    pub k: usize,
    /// Future responses drawn per dataset.
    pub m: usize,
    /// Bootstrap replicates.
    pub b: usize,
    pub x_f: f64,
    pub estimator: EstimatorKind,
    pub methods: Vec<StudyMethod>,
    pub seed: u64,
    pub profile: Profile,
    pub predictor: Predictor,
    pub scheme: Scheme,
    pub variant: MfbVariant,
    /// `None` picks the default for the estimator and `n`.
    pub cp_mode: Option<CpMode>,
}

impl SyntheticConfig {
    /// QE, CP and MFB with the sizes of `profile` (desk sizes for `Custom`).
    pub fn new(profile: Profile, n: usize, estimator: EstimatorKind, seed: u64) -> Self {
        let (k, m, b) = profile.sizes().unwrap_or((100, 1000, 500));
        Self {
            n,
            sigma: DEFAULT_SIGMA,
            alpha: 0.05,
            k,
            m,
            b,
            x_f: 0.5,
            estimator,
            methods: vec![StudyMethod::Qe, StudyMethod::Cp, StudyMethod::Mfb],
            seed,
            profile,
            predictor: Predictor::Mean,
            scheme: Scheme::RandomRegressor,
            variant: MfbVariant::Standard,
            cp_mode: None,
        }
    }

    pub fn with_methods(mut self, methods: &[StudyMethod]) -> Self {
        self.methods = methods.to_vec();
        self
    }

    /// Overrides `(K, M, B)` and marks the profile as custom.
    pub fn with_sizes(mut self, k: usize, m: usize, b: usize) -> Self {
        (self.k, self.m, self.b) = (k, m, b);
        self.profile = Profile::Custom;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.n == 0 || self.k == 0 || self.m == 0 || self.b == 0 {
            return domain("n, K, M and B must be positive");
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return domain(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.x_f > 0.0 && self.x_f < 1.0) {
            return domain(format!("x_f must be in (0,1), got {}", self.x_f));
        }
        if self.methods.is_empty() {
            return domain("no methods selected");
        }
        if self.estimator == EstimatorKind::Oracle && self.methods.iter().any(|&m| m != StudyMethod::Qe) {
            return domain("the oracle estimator supports QE only");
        }
        Ok(())
    }

    /// CP mode actually used, if CP runs.
    pub fn resolved_cp_mode(&self) -> Option<CpMode> {
        if !self.methods.contains(&StudyMethod::Cp) {
            return None;
        }
        Some(self.cp_mode.unwrap_or(match self.estimator {
            EstimatorKind::Kernel if self.n >= 200 => CpMode::RankApprox,
            _ => CpMode::Exact,
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub name: String,
    pub cvp_mean: f64,
    /// Sample variance (divisor `K - 1`).
    pub cvp_var: f64,
    pub mean_length: f64,
    pub cvp_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub config: SyntheticConfig,
    pub methods: Vec<MethodReport>,
    pub profile: Profile,
    pub seed: u64,
    pub estimator: String,
    pub cp_mode: Option<CpMode>,
    /// Replications that needed a redraw.
    pub redraws: usize,
    pub version: String,
    /// Wall-clock seconds; left empty unless requested so that reports are
    /// reproducible byte for byte.
    pub runtime_s: Option<f64>,
}

impl CoverageReport {
    pub fn method(&self, name: &str) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.name == name)
    }
}

/// One dataset's worth of results, one entry per method.
struct Replication {
    cvp: Vec<f64>,
    length: Vec<f64>,
    redrawn: bool,
}

/// Estimator for one dataset; kernel bandwidths are chosen by KS.
pub fn study_estimator(kind: EstimatorKind, data: &Dataset) -> Result<Option<EstimatorSpec>> {
    Ok(match kind {
        EstimatorKind::Kernel => Some(auto_kernel_estimator(data)?),
        EstimatorKind::Qr => Some(EstimatorSpec::quantile_regression()),
        EstimatorKind::Oracle => None,
    })
}

/// Intervals of every configured method on one simulated dataset.
pub fn study_intervals(cfg: &SyntheticConfig, data: &Dataset, seed: u64) -> Result<Vec<PredictionInterval>> {
    let x_f = [cfg.x_f];
    let oracle = SyntheticModel { sigma: cfg.sigma };
    let Some(est) = study_estimator(cfg.estimator, data)? else {
        return cfg.methods.iter().map(|_| qe_interval(&oracle, &x_f, cfg.alpha, Side::Two)).collect();
    };
    let fitted = if cfg.methods.contains(&StudyMethod::Qe) { Some(est.fit(data)?) } else { None };
    cfg.methods
        .iter()
        
        .map(|method| match method {
            StudyMethod::Qe => qe_interval(fitted.as_ref().expect("fitted for QE"), &x_f, cfg.alpha, Side::Two),
            StudyMethod::Cp => {
                let mode = cfg.resolved_cp_mode().expect("CP selected");
                cp_interval(data, &x_f, cfg.alpha, &est, Side::Two, mode, &CandidateGrid::default())
            }
            StudyMethod::Mfb => {
                let mfb = MfbConfig {
                    predictor: cfg.predictor,
                    scheme: cfg.scheme,
                    variant: cfg.variant,
                    b: cfg.b,
                    seed: derive_seed(seed, 1),
                };
                Ok(mfb_interval(data, &x_f, cfg.alpha, &est, &mfb, Side::Two)?.0)
            }
        })
        .collect()
}

fn replication(cfg: &SyntheticConfig, k: usize) -> Result<Replication> {
    let oracle = SyntheticModel { sigma: cfg.sigma };
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let seed = derive_seed_path(cfg.seed, &[k as u64, attempt as u64]);
        let data = gen_synthetic(cfg.n, cfg.sigma, derive_seed(seed, 0))?;
        let intervals = match study_intervals(cfg, &data, seed) {
            Ok(v) => v,
            Err(e) => {
                last = Some(e);
                continue;
            }
        };
        // The same future responses score every method.
        let mut rng = seeded(derive_seed(seed, 2));
        let future: Vec<f64> = (0..cfg.m).map(|_| oracle.sample_response(cfg.x_f, &mut rng)).collect();
        let cvp = intervals
            .iter()
            .map(|pi| future.iter().filter(|&&y| pi.contains(y)).count() as f64 / cfg.m as f64)
            .collect();
        let length = intervals.iter().map(|pi| pi.length()).collect();
        return Ok(Replication { cvp, length, redrawn: attempt > 0 });
    }
    let e = last.expect("at least one attempt");
    Err(Error::Domain(format!("replication {k} failed {MAX_ATTEMPTS} times; last error: {e}")))
}

fn mean_var(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (mean, var)
}

/// Runs the study: `K` datasets, each scored by `M` future draws at `x_f`.
pub fn estimate_cvp(cfg: &SyntheticConfig) -> Result<CoverageReport> {
    cfg.validate()?;
    let reps: Vec<Replication> = (0..cfg.k).into_par_iter().map(|k| replication(cfg, k)).collect::<Result<_>>()?;
    let methods = cfg
        .methods
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let cvp_values: Vec<f64> = reps.iter().map(|r| r.cvp[j]).collect();
            let lengths: Vec<f64> = reps.iter().map(|r| r.length[j]).collect();
            let (cvp_mean, cvp_var) = mean_var(&cvp_values);
            MethodReport { name: m.name().into(), cvp_mean, cvp_var, mean_length: mean_var(&lengths).0, cvp_values }
        })
        .collect();
    Ok(CoverageReport {
        config: cfg.clone(),
        methods,
        profile: cfg.profile,
        seed: cfg.seed,
        estimator: cfg.estimator.name().into(),
        cp_mode: cfg.resolved_cp_mode(),
        redraws: reps.iter().filter(|r| r.redrawn).count(),
        version: env!("CARGO_PKG_VERSION").into(),
        runtime_s: None,
    })
}

/// One line of the coverage-versus-`n` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub estimator: String,
    pub method: String,
    pub coverage_mean: f64,
    /// `n · Var(CVP)`.
    pub coverage_var_scaled: f64,
    pub mean_length: f64,
}

/// `{50, 100, ..., 400}`.
pub fn default_sweep_sizes() -> Vec<usize> {
    (1..=8).map(|i| 50 * i).collect()
}

/// Repeats the study for each sample size and estimator.
pub fn sweep_sample_sizes(base: &SyntheticConfig, n_list: &[usize], estimators: &[EstimatorKind]) -> Result<(Vec<SweepRow>, Vec<CoverageReport>)> {
    if n_list.is_empty() || estimators.is_empty() {
        return domain("sweep needs at least one sample size and one estimator");
    }
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &n in n_list {
        for &est in estimators {
            let cfg = SyntheticConfig { n, estimator: est, seed: derive_seed(base.seed, n as u64), ..base.clone() };
            let report = estimate_cvp(&cfg)?;
            for m in &report.methods {
                rows.push(SweepRow {
                    n,
                    estimator: est.name().into(),
                    method: m.name.clone(),
                    coverage_mean: m.cvp_mean,
                    coverage_var_scaled: n as f64 * m.cvp_var,
                    mean_length: m.mean_length,
                });
            }
            reports.push(report);
        }
    }
    Ok((rows, reports))
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Pooled coverage over all future draws against the average of the exact
/// per-dataset conditional coverages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TowerCheck {
    pub pooled: f64,
    pub averaged: f64,
    /// Monte Carlo standard error of `pooled - averaged`.
    pub se: f64,
}

impl TowerCheck {
    pub fn agrees(&self, n_se: f64) -> bool {
        (self.pooled - self.averaged).abs() <= n_se * self.se
    }
}

/// Checks that averaging conditional coverage over datasets reproduces the
/// unconditional coverage. The exact conditional coverage of each interval
/// comes from the true CDF.
pub fn tower_check(cfg: &SyntheticConfig, method: StudyMethod) -> Result<TowerCheck> {
    cfg.validate()?;
    let cfg = SyntheticConfig { methods: vec![method], ..cfg.clone() };
    let oracle = SyntheticModel { sigma: cfg.sigma };
    let x_f = [cfg.x_f];
    let per: Vec<(f64, f64)> = (0..cfg.k)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed_path(cfg.seed, &[k as u64, 0]);
            let data = gen_synthetic(cfg.n, cfg.sigma, derive_seed(seed, 0))?;
            let pi = study_intervals(&cfg, &data, seed)?.remove(0);
            let exact = oracle.cdf(pi.upper, &x_f)? - oracle.cdf(pi.lower, &x_f)?;
            let mut rng = seeded(derive_seed(seed, 2));
            let hits = (0..cfg.m).filter(|_| pi.contains(oracle.sample_response(cfg.x_f, &mut rng))).count();
            Ok((hits as f64 / cfg.m as f64, exact))
        })
        .collect::<Result<_>>()?;
    let kf = cfg.k as f64;
    let pooled = per.iter().map(|p| p.0).sum::<f64>() / kf;
    let averaged = per.iter().map(|p| p.1).sum::<f64>() / kf;
    let var: f64 = per.iter().map(|p| p.1 * (1.0 - p.1)).sum::<f64>() / cfg.m as f64;
    Ok(TowerCheck { pooled, averaged, se: var.sqrt() / kf })
}
