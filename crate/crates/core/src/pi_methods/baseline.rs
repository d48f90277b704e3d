//! Classical Gaussian prediction intervals, kept as reference points.

use nalgebra::{DMatrix, DVector};

use crate::cdf_models::Dataset;
use crate::error::{check_alpha, domain, Error, Result};
use crate::pi_methods::{MethodTag, PredictionInterval, Side};
use crate::stat_kernels::t_quantile;

/// Condition number of `X'X` at or above which the design counts as singular.
pub const MAX_CONDITION: f64 = 1e12;

fn t_bounds(center: f64, scale: f64, alpha: f64, df: u32, side: Side, method: MethodTag) -> Result<PredictionInterval> {
    let p = match side {
        Side::Two => alpha / 2.0,
        _ => alpha,
    };
    // Lower-tail quantile: negative.
    let t = t_quantile(p, df)?;
    PredictionInterval::sided(center + t * scale, center - t * scale, side, 1.0 - alpha, method, Some(center))
}

/// i.i.d. Gaussian interval `μ ± t_{n-1,α/2} σ sqrt(1 + 1/n)`.
pub fn baseline_t_interval(y: &[f64], alpha: f64, side: Side) -> Result<PredictionInterval> {
    check_alpha(alpha)?;
    let n = y.len();
    if n < 2 {
        return domain(format!("t interval needs at least 2 observations, got {n}"));
    }
    let nf = n as f64;
    let mean = y.iter().sum::<f64>() / nf;
    let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    t_bounds(mean, sd * (1.0 + 1.0 / nf).sqrt(), alpha, (n - 1) as u32, side, MethodTag::TIid)
}

/// Gaussian linear-model interval
/// `β'x_f ± t_{n-d,α/2} σ sqrt(1 + x_f'(X'X)^{-1} x_f)` with `σ² = RSS/(n-d)`.
///
/// The design is used as given: include a column of ones for an intercept.
pub fn baseline_ls_interval(data: &Dataset, x_f: &[f64], alpha: f64, side: Side) -> Result<PredictionInterval> {
    check_alpha(alpha)?;
    let (n, d) = (data.n(), data.d());
    if n <= d {
        return domain(format!("least-squares interval needs n > d (n = {n}, d = {d})"));
    }
    if x_f.len() != d {
        return domain(format!("x_f has {} coordinates, design has {d}", x_f.len()));
    }
    let x = DMatrix::from_row_slice(n, d, data.xs());
    let y = DVector::from_column_slice(data.y());
    let xtx = x.transpose() * &x;
    let sv = xtx.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 0.0) || smax / smin >= MAX_CONDITION {
        return Err(Error::Singular(format!("X'X condition number {:e} (limit {MAX_CONDITION:e})", smax / smin)));
    }
    let inv = xtx.try_inverse().ok_or_else(|| Error::Singular("X'X is not invertible".into()))?;
    let beta = &inv * (x.transpose() * &y);
    let rss = (&y - &x * &beta).norm_squared();
    let sigma = (rss / (n - d) as f64).sqrt();
    let xf = DVector::from_column_slice(x_f);
    let leverage = (xf.transpose() * &inv * &xf)[(0, 0)];
    let center = beta.dot(&xf);
    t_bounds(center, sigma * (1.0 + leverage).sqrt(), alpha, (n - d) as u32, side, MethodTag::TLs)
}

/// `x_f'(X'X)^{-1}x_f` for the design as given.
pub fn leverage(data: &Dataset, x_f: &[f64]) -> Result<f64> {
    let x = DMatrix::from_row_slice(data.n(), data.d(), data.xs());
    let inv = (x.transpose() * &x).try_inverse().ok_or_else(|| Error::Singular("X'X is not invertible".into()))?;
    let xf = DVector::from_column_slice(x_f);
    Ok((xf.transpose() * inv * xf)[(0, 0)])
}
