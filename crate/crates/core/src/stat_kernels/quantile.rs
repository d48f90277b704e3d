use crate::error::{domain, Result};

/// Lower empirical quantile: the order statistic at position `ceil(p·B)`
/// (1-based) of the sorted values.
pub fn empirical_quantile(values: &[f64], p: f64) -> Result<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    empirical_quantile_sorted(&sorted, p)
}

/// As [`empirical_quantile`] for values already sorted ascending.
pub fn empirical_quantile_sorted(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return domain("empirical quantile of an empty sample");
    }
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("p must be in (0,1), got {p}"));
    }
    let b = sorted.len() as f64;
    // The relative nudge absorbs representation error, e.g. 0.95 * 1000.
    let k = (p * b - 1e-9 * p * b).ceil().clamp(1.0, b) as usize;
    Ok(sorted[k - 1])
}
