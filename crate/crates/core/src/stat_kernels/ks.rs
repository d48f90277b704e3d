use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// One-sample Kolmogorov-Smirnov statistic against Unif(0,1) and its
/// asymptotic p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
///
/// Uses the alternating series `2 Σ (-1)^{k-1} exp(-2 k² λ²)` truncated at
/// `k = 100`. Below `lambda = 0.5` that series cancels catastrophically, so the
/// Jacobi theta form of the CDF is used instead.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.5 {
        let c = std::f64::consts::PI * std::f64::consts::PI / (8.0 * lambda * lambda);
        let mut cdf = 0.0;
        for k in 1..=100u32 {
            let j = (2 * k - 1) as f64;
            let term = (-j * j * c).exp();
            cdf += term;
            if term < 1e-300 {
                break;
            }
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut s = 0.0;
    for k in 1..=100u32 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
    }
    (2.0 * s).clamp(0.0, 1.0)
}

/// KS test of `sample` against the Unif(0,1) law.
pub fn ks_uniform_test(sample: &[f64]) -> Result<KsResult> {
    if sample.is_empty() {
        return domain("KS test needs a nonempty sample");
    }
    if let Some(bad) = sample.iter().find(|u| !(0.0..=1.0).contains(*u)) {
        return domain(format!("KS uniformity sample must lie in [0,1], found {bad}"));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &u) in sorted.iter().enumerate() {
        let above = (i as f64 + 1.0) / n - u;
        let below = u - i as f64 / n;
        d = d.max(above).max(below);
    }
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_survival(n.sqrt() * d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    // Direct definition of D as sup |F_n - F| over a fine grid plus jump points.
    fn brute_d(sample: &[f64]) -> f64 {
        let n = sample.len() as f64;
        let mut pts: Vec<f64> = (0..=10_000).map(|i| i as f64 / 10_000.0).collect();
        pts.extend_from_slice(sample);
        let mut d = 0.0f64;
        for &t in &pts {
            let le = sample.iter().filter(|&&u| u <= t).count() as f64 / n;
            let lt = sample.iter().filter(|&&u| u < t).count() as f64 / n;
            d = d.max((le - t).abs()).max((lt - t).abs());
        }
        d
    }

    #[test]
    fn three_point_statistic() {
        let s = [0.1, 0.5, 0.9];
        let r = ks_uniform_test(&s).unwrap();
        assert_abs_diff_eq!(r.statistic, 7.0 / 30.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.statistic, brute_d(&s), epsilon = 1e-12);
    }

    #[test]
    fn single_point() {
        assert_abs_diff_eq!(ks_uniform_test(&[0.5]).unwrap().statistic, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn uniform_spacing_has_high_p_value() {
        let n = 100;
        let s: Vec<f64> = (1..=n).map(|i| i as f64 / (n as f64 + 1.0)).collect();
        let r = ks_uniform_test(&s).unwrap();
        // Independent check with the plain alternating series.
        let lam = (n as f64).sqrt() * r.statistic;
        let direct: f64 = 2.0
            * (1..=100)
                .map(|k| {
                    let k = k as f64;
                    (if k as i64 % 2 == 1 { 1.0 } else { -1.0 }) * (-2.0 * k * k * lam * lam).exp()
                })
                .sum::<f64>();
        assert!(r.p_value > 0.99, "p = {}", r.p_value);
        assert_abs_diff_eq!(r.p_value, direct.min(1.0), epsilon = 1e-9);
    }

    #[test]
    fn survival_branches_agree_where_both_converge() {
        for &lam in &[0.5, 0.6, 0.8, 1.0] {
            let c = std::f64::consts::PI.powi(2) / (8.0 * lam * lam);
            let theta: f64 = (1..200)
                .map(|k| {
                    let j = (2 * k - 1) as f64;
                    (-j * j * c).exp()
                })
                .sum::<f64>()
                * (2.0 * std::f64::consts::PI).sqrt()
                / lam;
            assert_abs_diff_eq!(kolmogorov_survival(lam), 1.0 - theta, epsilon = 1e-12);
        }
        // Known table value: P(K > 1.3581) ≈ 0.05.
        assert_abs_diff_eq!(kolmogorov_survival(1.3581), 0.05, epsilon = 1e-4);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(ks_uniform_test(&[]).is_err());
        assert!(ks_uniform_test(&[0.2, 1.5]).is_err());
        assert!(ks_uniform_test(&[-0.1]).is_err());
    }
}
