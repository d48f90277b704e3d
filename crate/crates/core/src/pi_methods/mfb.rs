//! Model-free bootstrap prediction intervals.
//!
//! The data are mapped to ranks through the fitted conditional CDF, ranks
//! are resampled and pushed back through its inverse to get bootstrap
//! samples, and the spread of the predictive root `Y*_f - Ŷ*_f` over many
//! replicates calibrates the interval around `Ŷ_f`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdf_models::{clip_rank, pit_ranks, CdfModel, Dataset, EstimatorSpec, FittedModel, LocalCdf, RankVariant};
use crate::error::{check_alpha, domain, Error, Result};
use crate::pi_methods::{point_predict, MethodTag, PredictionInterval, Predictor, Side};
use crate::rng::{derive_seed_path, index, open_unit, seeded, SimRng};
use crate::stat_kernels::empirical_quantile;

pub const MIN_REPLICATES: usize = 100;
/// Extra attempts for a replicate whose refit fails.
pub const MAX_REDRAWS: usize = 10;
/// Largest tolerated share of replicates that still fail after redraws.
pub const MAX_FAILED_SHARE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Covariates are resampled with replacement.
    #[default]
    RandomRegressor,
    /// Covariates are held at their observed values.
    FixedRegressor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MfbVariant {
    /// Resample the plugin ranks.
    #[default]
    Standard,
    /// Draw ranks from Unif(0, 1).
    Limit,
    /// Resample delete-one ranks.
    Predictive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfbConfig {
    pub predictor: Predictor,
    pub scheme: Scheme,
    pub variant: MfbVariant,
    /// Number of bootstrap replicates.
    pub b: usize,
    pub seed: u64,
}

impl MfbConfig {
    pub fn new(b: usize, seed: u64) -> Self {
        Self { predictor: Predictor::Mean, scheme: Scheme::default(), variant: MfbVariant::default(), b, seed }
    }

    pub fn with_predictor(mut self, predictor: Predictor) -> Self {
        self.predictor = predictor;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_variant(mut self, variant: MfbVariant) -> Self {
        self.variant = variant;
        self
    }
}

/// Bootstrap distribution of the predictive root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSample {
    /// `Ŷ_f` from the fit on the observed data.
    pub center: f64,
    pub roots: Vec<f64>,
    pub b: usize,
    pub scheme: Scheme,
    pub variant: MfbVariant,
    pub predictor: Predictor,
    /// `Y*_f` per replicate.
    pub future_draws: Vec<f64>,
    /// `Ŷ*_f` per replicate.
    pub refit_predictions: Vec<f64>,
    /// Replicates that needed at least one redraw.
    pub redrawn: usize,
    /// Replicates dropped after exhausting their redraws.
    pub dropped: usize,
}

impl RootSample {
    /// `(Ŷ_f + q*(α/2), Ŷ_f + q*(1 - α/2))`, or the one-sided analogue at `α`.
    pub fn interval(&self, alpha: f64, side: Side) -> Result<PredictionInterval> {
        check_alpha(alpha)?;
        let (p_lo, p_hi) = match side {
            Side::Two => (alpha / 2.0, 1.0 - alpha / 2.0),
            Side::Lower | Side::Upper => (alpha, 1.0 - alpha),
        };
        let lo = self.center + empirical_quantile(&self.roots, p_lo)?;
        let hi = self.center + empirical_quantile(&self.roots, p_hi)?;
        PredictionInterval::sided(lo, hi, side, 1.0 - alpha, MethodTag::Mfb, Some(self.center))
    }
}

struct Replicate {
    future: f64,
    refit: f64,
}

/// Draws the bootstrap roots.
pub fn mfb_roots(data: &Dataset, x_f: &[f64], estimator: &EstimatorSpec, cfg: &MfbConfig) -> Result<RootSample> {
    run(data, x_f, estimator, cfg, false)
}

/// MFB interval together with the roots it was read from.
pub fn mfb_interval(
    data: &Dataset,
    x_f: &[f64],
    alpha: f64,
    estimator: &EstimatorSpec,
    cfg: &MfbConfig,
    side: Side,
) -> Result<(PredictionInterval, RootSample)> {
    check_alpha(alpha)?;
    let roots = mfb_roots(data, x_f, estimator, cfg)?;
    Ok((roots.interval(alpha, side)?, roots))
}

fn run(data: &Dataset, x_f: &[f64], estimator: &EstimatorSpec, cfg: &MfbConfig, force_generic: bool) -> Result<RootSample> {
    let n = data.n();
    if cfg.b < MIN_REPLICATES {
        return domain(format!("MFB needs B >= {MIN_REPLICATES}, got {}", cfg.b));
    }
    if n < 2 {
        return domain("MFB needs at least 2 observations");
    }
    if x_f.len() != data.d() {
        return domain(format!("x_f has {} coordinates, data has {}", x_f.len(), data.d()));
    }
    let fitted = estimator.fit(data)?;
    let ranks = match cfg.variant {
        MfbVariant::Standard => Some(pit_ranks(estimator, data, RankVariant::Plugin)?.u),
        MfbVariant::Predictive => Some(pit_ranks(estimator, data, RankVariant::DeleteOne)?.u),
        MfbVariant::Limit => None,
    };
    let center = point_predict(&fitted, x_f, cfg.predictor)?;

    let engine = match (&fitted, force_generic) {
        (FittedModel::Kernel(m), false) => Engine::local(m, x_f)?,
        _ => Engine::Generic,
    };

    let draw = |b: usize| -> (Option<Replicate>, usize, Option<String>) {
        let mut last_err = None;
        for attempt in 0..=MAX_REDRAWS {
            let mut rng = seeded(derive_seed_path(cfg.seed, &[b as u64, attempt as u64]));
            let res = replicate(&mut rng, data, x_f, estimator, &fitted, &engine, ranks.as_deref(), cfg);
            match res {
                Ok(r) => return (Some(r), attempt, None),
                Err(e) => last_err = Some(e.to_string()),
            }
        }
        (None, MAX_REDRAWS, last_err)
    };
    let outcomes: Vec<_> = (0..cfg.b).into_par_iter().map(draw).collect();

    let mut sample = RootSample {
        center,
        roots: Vec::with_capacity(cfg.b),
        b: cfg.b,
        scheme: cfg.scheme,
        variant: cfg.variant,
        predictor: cfg.predictor,
        future_draws: Vec::with_capacity(cfg.b),
        refit_predictions: Vec::with_capacity(cfg.b),
        redrawn: 0,
        dropped: 0,
    };
    let mut failures = Vec::new();
    for (b, (rep, attempts, err)) in outcomes.into_iter().enumerate() {
        if attempts > 0 {
            sample.redrawn += 1;
        }
        match rep {
            Some(r) => {
                sample.roots.push(r.future - r.refit);
                sample.future_draws.push(r.future);
                sample.refit_predictions.push(r.refit);
            }
            None => {
                sample.dropped += 1;
                failures.push((b, err.unwrap_or_default()));
            }
        }
    }
    if failure_budget_exceeded(sample.dropped, cfg.b) {
        let shown: Vec<String> = failures.iter().take(3).map(|(b, e)| format!("replicate {b}: {e}")).collect();
        return Err(Error::Bootstrap(format!(
            "{} of {} replicates failed after {MAX_REDRAWS} redraws (limit {:.0}%); {}",
            sample.dropped,
            cfg.b,
            100.0 * MAX_FAILED_SHARE,
            shown.join("; ")
        )));
    }
    if sample.roots.iter().any(|r| !r.is_finite()) {
        return Err(Error::Bootstrap("non-finite predictive root".into()));
    }
    Ok(sample)
}

fn failure_budget_exceeded(dropped: usize, b: usize) -> bool {
    dropped as f64 > MAX_FAILED_SHARE * b as f64
}

/// How bootstrap responses are generated and refit.
enum Engine {
    /// Kernel fits: only rows with weight at `x_f` influence `Ŷ*_f`, so only
    /// those responses are generated and the refit is the local mixture at
    /// `x_f`. Identical to a full refit because the weight kernel has
    /// bounded support.
    Local { w_f: Vec<f64>, locals: Vec<Option<LocalCdf>>, at_f: LocalCdf, h0: f64, kind: crate::stat_kernels::CdfKernel },
    Generic,
}

impl Engine {
    fn local(m: &crate::cdf_models::KernelCdfModel, x_f: &[f64]) -> Result<Self> {
        let data = m.data();
        let w_f: Vec<f64> = (0..data.n()).map(|i| m.weight(data.x(i), x_f)).collect();
        let locals = (0..data.n())
            .map(|i| if w_f[i] > 0.0 { m.local(data.x(i)).map(Some) } else { Ok(None) })
            .collect::<Result<Vec<_>>>()?;
        Ok(Engine::Local { w_f, locals, at_f: m.local(x_f)?, h0: m.h0(), kind: m.spec().cdf })
    }
}

#[allow(clippy::too_many_arguments)]
fn replicate(
    rng: &mut SimRng,
    data: &Dataset,
    x_f: &[f64],
    estimator: &EstimatorSpec,
    fitted: &FittedModel,
    engine: &Engine,
    ranks: Option<&[f64]>,
    cfg: &MfbConfig,
) -> Result<Replicate> {
    let n = data.n();
    let rows: Vec<usize> = match cfg.scheme {
        Scheme::RandomRegressor => (0..n).map(|_| index(rng, n)).collect(),
        Scheme::FixedRegressor => (0..n).collect(),
    };
    let u: Vec<f64> = (0..n)
        .map(|_| match ranks {
            Some(r) => r[index(rng, n)],
            None => clip_rank(open_unit(rng)),
        })
        .collect();
    let v_f = clip_rank(open_unit(rng));

    match engine {
        Engine::Local { w_f, locals, at_f, h0, kind } => {
            let mut ys = Vec::new();
            let mut ws = Vec::new();
            for (&j, &uj) in rows.iter().zip(&u) {
                if let Some(local) = &locals[j] {
                    ys.push(local.quantile(uj));
                    ws.push(w_f[j]);
                }
            }
            let refit = LocalCdf::new(ys, ws, *h0, *kind).ok_or_else(|| Error::OutOfSupport(x_f.to_vec()))?;
            let pred = match cfg.predictor {
                Predictor::Mean => refit.mean(),
                Predictor::Median => refit.quantile(0.5),
            };
            Ok(Replicate { future: at_f.quantile(v_f), refit: pred })
        }
        Engine::Generic => {
            let d = data.d();
            let mut xs = Vec::with_capacity(n * d);
            let mut ys = Vec::with_capacity(n);
            for (&j, &uj) in rows.iter().zip(&u) {
                xs.extend_from_slice(data.x(j));
                ys.push(fitted.quantile(uj, data.x(j))?);
            }
            let boot = Dataset::from_parts_unchecked(xs, d, ys);
            let refit = estimator.refit(&boot, fitted)?;
            let pred = point_predict(&refit, x_f, cfg.predictor)?;
            Ok(Replicate { future: fitted.quantile(v_f, x_f)?, refit: pred })
        }
    }
}
