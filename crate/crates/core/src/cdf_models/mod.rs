//! Conditional CDF estimators, PIT ranks and bandwidth selection.

mod bandwidth;
mod dataset;
mod kernel;
mod qr;

use serde::{Deserialize, Serialize};

pub use bandwidth::{auto_kernel_estimator, default_bandwidth_grids, select_bandwidths, BandwidthChoice};
pub use dataset::Dataset;
pub use kernel::{fit_kernel_cdf, KernelCdfModel, LocalCdf};
pub use qr::{
    default_tau_grid, fit_qr_cdf, fit_qr_cdf_from, fit_quantile_regression, fit_quantile_regression_from, qr_objective,
    QrCdfModel, QrFit,
};

use crate::error::{domain, Error, Result};
use crate::stat_kernels::KernelSpec;

/// Ranks are kept this far away from 0 and 1.
pub const RANK_CLIP: f64 = 1e-6;

/// A fitted conditional distribution `F(y | x)`.
pub trait CdfModel: Send + Sync {
    fn cdf(&self, y: f64, x: &[f64]) -> Result<f64>;

    /// `inf { y : F(y | x) >= p }`.
    fn quantile(&self, p: f64, x: &[f64]) -> Result<f64>;

    fn quantiles(&self, ps: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        ps.iter().map(|&p| self.quantile(p, x)).collect()
    }

    /// Exact conditional mean when the model has one in closed form.
    fn mean(&self, _x: &[f64]) -> Option<Result<f64>> {
        None
    }
}

/// Evaluates `F(y | x)` with the infinite limits handled exactly.
pub fn cdf_eval<M: CdfModel + ?Sized>(model: &M, y: f64, x: &[f64]) -> Result<f64> {
    if y.is_nan() {
        return domain("cdf evaluated at NaN");
    }
    let v = model.cdf(y, x)?;
    Ok(if y == f64::NEG_INFINITY {
        0.0
    } else if y == f64::INFINITY {
        1.0
    } else {
        v
    })
}

/// Generalized inverse `F^{-1}(p | x)` for `p` in (0, 1).
pub fn cdf_quantile<M: CdfModel + ?Sized>(model: &M, p: f64, x: &[f64]) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("quantile level must be in (0,1), got {p}"));
    }
    model.quantile(p, x)
}

#[inline]
pub(crate) fn clip_rank(u: f64) -> f64 {
    u.clamp(RANK_CLIP, 1.0 - RANK_CLIP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankVariant {
    #[default]
    Plugin,
    DeleteOne,
}

/// Estimated ranks `U_i = F(Y_i | X_i)`, clipped to `[1e-6, 1 - 1e-6]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankVector {
    pub u: Vec<f64>,
    pub variant: RankVariant,
}

/// Which conditional CDF estimator to fit, with its tuning parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EstimatorSpec {
    Kernel {
        h: f64,
        h0: f64,
        #[serde(default)]
        kernel: KernelSpec,
    },
    QuantileRegression {
        #[serde(default = "default_tau_grid")]
        taus: Vec<f64>,
    },
}

impl EstimatorSpec {
    pub fn kernel(h: f64, h0: f64) -> Self {
        EstimatorSpec::Kernel { h, h0, kernel: KernelSpec::default() }
    }

    pub fn quantile_regression() -> Self {
        EstimatorSpec::QuantileRegression { taus: default_tau_grid() }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorSpec::Kernel { .. } => "kernel",
            EstimatorSpec::QuantileRegression { .. } => "qr",
        }
    }

    pub fn fit(&self, data: &Dataset) -> Result<FittedModel> {
        match self {
            EstimatorSpec::Kernel { h, h0, kernel } => Ok(FittedModel::Kernel(fit_kernel_cdf(data, *h, *h0, *kernel)?)),
            EstimatorSpec::QuantileRegression { taus } => Ok(FittedModel::Qr(fit_qr_cdf(data, taus)?)),
        }
    }

    /// Refit warm-started from a previous fit of the same family.
    pub fn refit(&self, data: &Dataset, previous: &FittedModel) -> Result<FittedModel> {
        match (self, previous) {
            (EstimatorSpec::QuantileRegression { taus }, FittedModel::Qr(prev)) => {
                Ok(FittedModel::Qr(fit_qr_cdf_from(data, taus, Some(prev))?))
            }
            _ => self.fit(data),
        }
    }
}

/// A fitted estimator of either family.
#[derive(Debug, Clone)]
pub enum FittedModel {
    Kernel(KernelCdfModel),
    Qr(QrCdfModel),
}

impl CdfModel for FittedModel {
    fn cdf(&self, y: f64, x: &[f64]) -> Result<f64> {
        match self {
            FittedModel::Kernel(m) => m.cdf(y, x),
            FittedModel::Qr(m) => m.cdf(y, x),
        }
    }

    fn quantile(&self, p: f64, x: &[f64]) -> Result<f64> {
        match self {
            FittedModel::Kernel(m) => m.quantile(p, x),
            FittedModel::Qr(m) => m.quantile(p, x),
        }
    }

    fn quantiles(&self, ps: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        match self {
            FittedModel::Kernel(m) => m.quantiles(ps, x),
            FittedModel::Qr(m) => m.quantiles(ps, x),
        }
    }

    fn mean(&self, x: &[f64]) -> Option<Result<f64>> {
        match self {
            FittedModel::Kernel(m) => m.mean(x),
            FittedModel::Qr(m) => m.mean(x),
        }
    }
}

/// Kernel sums behind the ranks: `A_i = Σ_j W_ji K((Y_i - Y_j)/h0)` and
/// `D_i = Σ_j W_ji`, plus the self weight `W_ii`.
pub(crate) struct KernelRankSums {
    pub a: Vec<f64>,
    pub d: Vec<f64>,
    pub self_w: Vec<f64>,
    pub self_k: f64,
}

pub(crate) fn kernel_rank_sums(model: &KernelCdfModel) -> KernelRankSums {
    let data = model.data();
    let n = data.n();
    let spec = model.spec();
    let inv = 1.0 / model.h0();
    let mut a = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut self_w = vec![0.0; n];
    for i in 0..n {
        for j in i..n {
            let w = model.weight(data.x(i), data.x(j));
            if w == 0.0 {
                continue;
            }
            if i == j {
                self_w[i] = w;
                a[i] += w * spec.cdf.cdf(0.0);
                d[i] += w;
                continue;
            }
            let v = (data.y()[i] - data.y()[j]) * inv;
            a[i] += w * spec.cdf.cdf(v);
            a[j] += w * spec.cdf.cdf(-v);
            d[i] += w;
            d[j] += w;
        }
    }
    KernelRankSums { a, d, self_w, self_k: spec.cdf.cdf(0.0) }
}

/// PIT ranks of the sample under the given estimator.
///
/// `Plugin` evaluates the fit on all `n` points at each `(X_i, Y_i)`;
/// `DeleteOne` evaluates the fit that leaves point `i` out.
pub fn pit_ranks(spec: &EstimatorSpec, data: &Dataset, variant: RankVariant) -> Result<RankVector> {
    let n = data.n();
    if variant == RankVariant::DeleteOne && n < 2 {
        return domain("delete-one ranks need at least 2 observations");
    }
    let u = match (spec.fit(data)?, variant) {
        (FittedModel::Kernel(m), _) => {
            let s = kernel_rank_sums(&m);
            (0..n)
                .map(|i| {
                    let (a, d) = match variant {
                        RankVariant::Plugin => (s.a[i], s.d[i]),
                        RankVariant::DeleteOne => (s.a[i] - s.self_w[i] * s.self_k, s.d[i] - s.self_w[i]),
                    };
                    if d > 0.0 {
                        Ok(clip_rank(a / d))
                    } else {
                        Err(Error::OutOfSupport(data.x(i).to_vec()))
                    }
                })
                .collect::<Result<Vec<_>>>()?
        }
        (FittedModel::Qr(m), RankVariant::Plugin) => (0..n)
            .map(|i| m.cdf(data.y()[i], data.x(i)).map(clip_rank))
            .collect::<Result<Vec<_>>>()?,
        (FittedModel::Qr(m), RankVariant::DeleteOne) => (0..n)
            .map(|i| {
                let rest = data.without(i)?;
                let fit = EstimatorSpec::QuantileRegression { taus: m.taus().to_vec() }.refit(&rest, &FittedModel::Qr(m.clone()))?;
                fit.cdf(data.y()[i], data.x(i)).map(clip_rank)
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(RankVector { u, variant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stat_kernels::{ks_uniform_test, CdfKernel, WeightKernel};
    use approx::assert_abs_diff_eq;
    use rand::RngExt;

    #[test]
    fn infinite_arguments() {
        let ds = Dataset::univariate(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        let m = EstimatorSpec::kernel(5.0, 0.1).fit(&ds).unwrap();
        assert_eq!(cdf_eval(&m, f64::NEG_INFINITY, &[0.5]).unwrap(), 0.0);
        assert_eq!(cdf_eval(&m, f64::INFINITY, &[0.5]).unwrap(), 1.0);
        assert!(cdf_eval(&m, f64::NAN, &[0.5]).is_err());
        assert!(cdf_quantile(&m, 0.0, &[0.5]).is_err());
        assert!(cdf_quantile(&m, 1.0, &[0.5]).is_err());
    }

    #[test]
    fn kernel_ranks_match_direct_evaluation() {
        let mut rng = crate::rng::seeded(3);
        let x: Vec<f64> = (0..40).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = x.iter().map(|v| v + 0.3 * rng.random::<f64>()).collect();
        let ds = Dataset::univariate(x, y).unwrap();
        let spec = EstimatorSpec::kernel(0.2, 0.05);
        let plug = pit_ranks(&spec, &ds, RankVariant::Plugin).unwrap();
        let del = pit_ranks(&spec, &ds, RankVariant::DeleteOne).unwrap();
        let full = spec.fit(&ds).unwrap();
        for i in 0..ds.n() {
            let direct = clip_rank(full.cdf(ds.y()[i], ds.x(i)).unwrap());
            assert_abs_diff_eq!(plug.u[i], direct, epsilon = 1e-12);
            let rest = spec.fit(&ds.without(i).unwrap()).unwrap();
            let direct = clip_rank(rest.cdf(ds.y()[i], ds.x(i)).unwrap());
            assert_abs_diff_eq!(del.u[i], direct, epsilon = 1e-12);
        }
    }

    #[test]
    fn identical_rows_share_a_rank() {
        let ds = Dataset::univariate(vec![0.3, 0.3], vec![1.0, 1.0]).unwrap();
        for spec in [EstimatorSpec::kernel(0.1, 0.1)] {
            let r = pit_ranks(&spec, &ds, RankVariant::Plugin).unwrap();
            assert_eq!(r.u[0], r.u[1]);
        }
    }

    #[test]
    fn degenerate_response_ranks_are_one_half() {
        let ds = Dataset::univariate(vec![0.1, 0.4, 0.7, 0.9], vec![2.0; 4]).unwrap();
        let spec = EstimatorSpec::Kernel { h: 1.0, h0: 0.1, kernel: KernelSpec::new(WeightKernel::Epanechnikov, CdfKernel::Step) };
        let r = pit_ranks(&spec, &ds, RankVariant::Plugin).unwrap();
        assert!(r.u.iter().all(|&u| u == 0.5));
    }

    #[test]
    fn delete_one_isolated_point_is_out_of_support() {
        let ds = Dataset::univariate(vec![0.0, 10.0], vec![0.0, 1.0]).unwrap();
        let err = pit_ranks(&EstimatorSpec::kernel(0.5, 0.1), &ds, RankVariant::DeleteOne).unwrap_err();
        assert!(matches!(err, Error::OutOfSupport(_)));
    }

    #[test]
    fn qr_ranks_clip_and_delete_one_runs() {
        let mut rng = crate::rng::seeded(5);
        let x: Vec<f64> = (0..25).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + rng.random::<f64>()).collect();
        let ds = Dataset::univariate(x, y).unwrap();
        let spec = EstimatorSpec::quantile_regression();
        for variant in [RankVariant::Plugin, RankVariant::DeleteOne] {
            let r = pit_ranks(&spec, &ds, variant).unwrap();
            assert!(r.u.iter().all(|&u| (RANK_CLIP..=1.0 - RANK_CLIP).contains(&u)));
        }
    }

    #[test]
    fn true_cdf_ranks_look_uniform() {
        // Ranks under the true law are exactly uniform; the KS p-values over
        // repeated draws should themselves be spread over (0, 1).
        let mut rng = crate::rng::seeded(77);
        let mut small = 0;
        for _ in 0..200 {
            let u: Vec<f64> = (0..100)
                .map(|_| {
                    let x = rng.random::<f64>();
                    let z = crate::stat_kernels::normal_quantile(crate::rng::open_unit(&mut rng)).unwrap();
                    crate::stat_kernels::normal_cdf(((x + z) - x) / 1.0)
                })
                .collect();
            if ks_uniform_test(&u).unwrap().p_value < 0.05 {
                small += 1;
            }
        }
        assert!(small <= 20, "{small} of 200 below 0.05");
    }

    #[test]
    fn estimator_spec_serde_round_trip() {
        for spec in [EstimatorSpec::kernel(0.1, 0.2), EstimatorSpec::quantile_regression()] {
            let s = serde_json::to_string(&spec).unwrap();
            assert_eq!(serde_json::from_str::<EstimatorSpec>(&s).unwrap(), spec);
        }
        let parsed: EstimatorSpec = serde_json::from_str(r#"{"kind":"quantile-regression"}"#).unwrap();
        assert_eq!(parsed, EstimatorSpec::quantile_regression());
    }
}
