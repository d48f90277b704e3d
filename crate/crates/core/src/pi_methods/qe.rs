use crate::cdf_models::{cdf_quantile, CdfModel};
use crate::error::{check_alpha, Result};
use crate::pi_methods::{MethodTag, PredictionInterval, Side};

/// Quantile-estimation interval read directly off the fitted conditional
/// CDF: `(F^{-1}(α/2), F^{-1}(1 - α/2))`, or one tail at level `α`.
pub fn qe_interval<M: CdfModel + ?Sized>(model: &M, x_f: &[f64], alpha: f64, side: Side) -> Result<PredictionInterval> {
    check_alpha(alpha)?;
    let level = 1.0 - alpha;
    match side {
        Side::Two => {
            let lo = cdf_quantile(model, alpha / 2.0, x_f)?;
            let hi = cdf_quantile(model, 1.0 - alpha / 2.0, x_f)?;
            PredictionInterval::new(lo, hi, level, MethodTag::Qe, None)
        }
        Side::Lower => {
            let hi = cdf_quantile(model, 1.0 - alpha, x_f)?;
            PredictionInterval::sided(hi, hi, side, level, MethodTag::Qe, None)
        }
        Side::Upper => {
            let lo = cdf_quantile(model, alpha, x_f)?;
            PredictionInterval::sided(lo, lo, side, level, MethodTag::Qe, None)
        }
    }
}
