//! Low-level statistical primitives: smoothing kernels, the check loss, the
//! Kolmogorov-Smirnov uniformity test, Student-t quantiles and empirical
//! quantiles. Everything here is pure and thread-safe.

mod kernel;
mod ks;
mod quantile;
mod student_t;

pub use kernel::{kernel_weight, smooth_cdf, CdfKernel, KernelSpec, WeightKernel};
pub use ks::{kolmogorov_survival, ks_uniform_test, KsResult};
pub use quantile::{empirical_quantile, empirical_quantile_sorted};
pub use student_t::{t_cdf, t_density, t_quantile, t_sample};

use crate::error::{domain, Result};

/// Standard normal CDF.
#[inline]
pub fn normal_cdf(v: f64) -> f64 {
    0.5 * libm::erfc(-v * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> Result<f64> {
    use statrs::distribution::{ContinuousCDF, Normal};
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("p must be in (0,1), got {p}"));
    }
    Ok(Normal::standard().inverse_cdf(p))
}

/// Check (pinball) loss `r (tau - 1{r < 0})`.
pub fn check_loss(r: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau < 1.0) {
        return domain(format!("tau must be in (0,1), got {tau}"));
    }
    Ok(check_loss_unchecked(r, tau))
}

#[inline]
pub(crate) fn check_loss_unchecked(r: f64, tau: f64) -> f64 {
    if r < 0.0 {
        r * (tau - 1.0)
    } else {
        r * tau
    }
}

/// Convolution `(f ⋆ φ_σ)(u) = ∫ f(u - s) φ_σ(s) ds` by the trapezoid rule
/// on `s ∈ [-half_width, half_width]` with the given step.
pub fn gaussian_convolution(
    f: impl Fn(f64) -> f64,
    sigma: f64,
    u: f64,
    half_width: f64,
    step: f64,
) -> Result<f64> {
    if !(sigma > 0.0 && half_width > 0.0 && step > 0.0) {
        return domain("sigma, half_width and step must be positive");
    }
    let n = (2.0 * half_width / step).round() as usize;
    let h = 2.0 * half_width / n as f64;
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let mut acc = 0.0;
    for i in 0..=n {
        let s = -half_width + i as f64 * h;
        let z = s / sigma;
        let g = norm * (-0.5 * z * z).exp();
        if g == 0.0 {
            continue;
        }
        let wt = if i == 0 || i == n { 0.5 } else { 1.0 };
        acc += wt * f(u - s) * g;
    }
    Ok(acc * h)
}
