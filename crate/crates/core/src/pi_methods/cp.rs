//! Distributional conformal prediction.
//!
//! A candidate future response `y` is scored by how extreme its PIT rank is
//! among the ranks of the augmented sample; candidates whose conformal
//! p-value exceeds `alpha` form the acceptance region.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cdf_models::{clip_rank, kernel_rank_sums, CdfModel, Dataset, EstimatorSpec, FittedModel, KernelCdfModel};
use crate::error::{check_alpha, domain, Error, Result};
use crate::pi_methods::{MethodTag, PredictionInterval, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CpMode {
    /// Refit on the augmented sample for every candidate.
    Exact,
    /// Ranks from the fit on the observed sample only.
    RankApprox,
}

impl CpMode {
    /// Rank approximation for kernel fits with `n >= 200`, exact otherwise.
    pub fn default_for(estimator: &EstimatorSpec, n: usize) -> Self {
        match estimator {
            EstimatorSpec::Kernel { .. } if n >= 200 => CpMode::RankApprox,
            _ => CpMode::Exact,
        }
    }
}

/// Candidate responses tried by CP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateGrid {
    /// `points` equispaced values on `[min Y - pad·range, max Y + pad·range]`.
    Span { points: usize, pad: f64 },
    Explicit(Vec<f64>),
}

impl Default for CandidateGrid {
    fn default() -> Self {
        CandidateGrid::Span { points: 200, pad: 0.1 }
    }
}

impl CandidateGrid {
    pub fn points(&self, data: &Dataset) -> Result<Vec<f64>> {
        match self {
            CandidateGrid::Span { points, pad } => {
                if *points < 2 || !(*pad >= 0.0) {
                    return domain("candidate grid needs at least 2 points and a nonnegative pad");
                }
                let (lo, hi) = data.y_range();
                let r = if hi > lo { hi - lo } else { 1.0 };
                let (a, b) = (lo - pad * r, hi + pad * r);
                let step = (b - a) / (*points - 1) as f64;
                let mut v: Vec<f64> = (0..*points).map(|k| if k + 1 == *points { b } else { a + k as f64 * step }).collect();
                if hi == lo {
                    // The only plausible value must be a candidate.
                    let at = v.partition_point(|&y| y < lo);
                    v.insert(at, lo);
                }
                Ok(v)
            }
            CandidateGrid::Explicit(v) => {
                if v.is_empty() || v.iter().any(|y| !y.is_finite()) {
                    return domain("explicit candidate grid must be nonempty and finite");
                }
                let mut v = v.clone();
                v.sort_by(f64::total_cmp);
                Ok(v)
            }
        }
    }
}

/// Conformity score of a rank: `|u - 1/2|` for two-sided intervals, `u`
/// when only large responses are suspect (`Lower`, giving `(-inf, c]`) and
/// `-u` when only small ones are (`Upper`, giving `(c, inf)`).
#[inline]
pub fn conformity_score(u: f64, side: Side) -> f64 {
    match side {
        Side::Two => (u - 0.5).abs(),
        Side::Lower => u,
        Side::Upper => -u,
    }
}

/// Scores closer than this count as tied. Ranks clipped at `1e-6` and
/// `1 - 1e-6` give scores that differ only by rounding.
pub const SCORE_TIE_TOL: f64 = 1e-12;

/// `(1/(n+1)) Σ 1(V_i >= V_{n+1})` over the `n` sample scores and the
/// candidate's own score.
pub fn cp_p_value(scores: &[f64], candidate: f64) -> f64 {
    let count = 1 + scores.iter().filter(|&&v| v >= candidate - SCORE_TIE_TOL).count();
    count as f64 / (scores.len() + 1) as f64
}

/// Conformal p-value of every candidate.
pub fn cp_p_values(
    data: &Dataset,
    x_f: &[f64],
    estimator: &EstimatorSpec,
    side: Side,
    mode: CpMode,
    candidates: &[f64],
) -> Result<Vec<f64>> {
    if x_f.len() != data.d() {
        return domain(format!("x_f has {} coordinates, data has {}", x_f.len(), data.d()));
    }
    let n = data.n();
    let fitted = estimator.fit(data)?;
    let augmented_ranks: Box<dyn Fn(f64) -> Result<(Vec<f64>, f64)> + Sync> = match (&fitted, mode) {
        (FittedModel::Kernel(m), CpMode::Exact) => Box::new(kernel_exact_ranks(m, x_f)?),
        (FittedModel::Kernel(m), CpMode::RankApprox) => {
            let s = kernel_rank_sums(m);
            let base: Vec<f64> = (0..n).map(|i| clip_rank(s.a[i] / s.d[i])).collect();
            let local = m.local(x_f)?;
            Box::new(move |y| Ok((base.clone(), clip_rank(local.cdf(y)))))
        }
        (FittedModel::Qr(m), CpMode::RankApprox) => {
            let base: Vec<f64> = (0..n).map(|i| m.cdf(data.y()[i], data.x(i)).map(clip_rank)).collect::<Result<_>>()?;
            let curve = m.quantile_curve(x_f)?;
            Box::new(move |y| Ok((base.clone(), clip_rank(crate::cdf_models::QrCdfModel::curve_cdf(&curve, y)))))
        }
        (FittedModel::Qr(_), CpMode::Exact) => {
            let fitted = fitted.clone();
            Box::new(move |y| {
                let aug = data.with_point(x_f, y)?;
                let refit = estimator.refit(&aug, &fitted)?;
                let ranks: Vec<f64> =
                    (0..n).map(|i| refit.cdf(data.y()[i], data.x(i)).map(clip_rank)).collect::<Result<_>>()?;
                let own = clip_rank(refit.cdf(y, x_f)?);
                Ok((ranks, own))
            })
        }
    };
    candidates
        .par_iter()
        .map(|&y| {
            let (ranks, own) = augmented_ranks(y)?;
            let scores: Vec<f64> = ranks.iter().map(|&u| conformity_score(u, side)).collect();
            Ok(cp_p_value(&scores, conformity_score(own, side)))
        })
        .collect()
}

/// Exact augmented ranks for the kernel estimator from the sums of the
/// observed sample, `O(n)` per candidate instead of a full refit.
fn kernel_exact_ranks(m: &KernelCdfModel, x_f: &[f64]) -> Result<impl Fn(f64) -> Result<(Vec<f64>, f64)> + Sync> {
    let data = m.data().clone();
    let s = kernel_rank_sums(m);
    let kind = m.spec().cdf;
    let inv = 1.0 / m.h0();
    let w_f: Vec<f64> = (0..data.n()).map(|i| m.weight(data.x(i), x_f)).collect();
    let w_ff = m.weight(x_f, x_f);
    let d_f: f64 = w_f.iter().sum::<f64>() + w_ff;
    if !(d_f > 0.0) {
        return Err(Error::OutOfSupport(x_f.to_vec()));
    }
    Ok(move |y: f64| {
        let mut own = w_ff * kind.cdf(0.0);
        let ranks = (0..data.n())
            .map(|i| {
                let yi = data.y()[i];
                if w_f[i] > 0.0 {
                    own += w_f[i] * kind.cdf((y - yi) * inv);
                    clip_rank((s.a[i] + w_f[i] * kind.cdf((yi - y) * inv)) / (s.d[i] + w_f[i]))
                } else {
                    clip_rank(s.a[i] / s.d[i])
                }
            })
            .collect();
        Ok((ranks, clip_rank(own / d_f)))
    })
}

/// CP prediction interval: the hull of accepted candidates (`p > alpha`),
/// with the open end of a one-sided interval sent to infinity.
pub fn cp_interval(
    data: &Dataset,
    x_f: &[f64],
    alpha: f64,
    estimator: &EstimatorSpec,
    side: Side,
    mode: CpMode,
    grid: &CandidateGrid,
) -> Result<PredictionInterval> {
    check_alpha(alpha)?;
    let n = data.n();
    let need = (1.0 / alpha - 1e-12).ceil() as usize - 1;
    if n < need {
        return domain(format!("CP at alpha = {alpha} needs n >= {need} (got n = {n}); no candidate could be rejected"));
    }
    let candidates = grid.points(data)?;
    let p = cp_p_values(data, x_f, estimator, side, mode, &candidates)?;
    // Accept iff p > alpha, judged on the integer count to avoid rounding.
    let cutoff = alpha * (n + 1) as f64 + 1e-9;
    let accepted: Vec<f64> =
        candidates.iter().zip(&p).filter(|(_, &pv)| pv * (n + 1) as f64 > cutoff).map(|(&y, _)| y).collect();
    let (Some(&lo), Some(&hi)) = (accepted.first(), accepted.last()) else {
        return Err(Error::EmptyAcceptance);
    };
    PredictionInterval::sided(lo, hi, side, 1.0 - alpha, MethodTag::Cp, None)
}
