use statrs::distribution::{Continuous, ContinuousCDF, StudentsT};

use crate::error::{domain, Result};

fn dist(df: u32) -> Result<StudentsT> {
    if df == 0 {
        return domain("degrees of freedom must be >= 1");
    }
    StudentsT::new(0.0, 1.0, df as f64).map_err(|e| crate::Error::Domain(e.to_string()))
}

/// Quantile of the standard Student-t distribution with `df` degrees of freedom.
pub fn t_quantile(p: f64, df: u32) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("p must be in (0,1), got {p}"));
    }
    if df == 1 {
        // Cauchy closed form.
        return Ok((std::f64::consts::PI * (p - 0.5)).tan());
    }
    let t = dist(df)?;
    // Evaluate in the lower tail and reflect, so q(p) = -q(1-p) exactly.
    if p > 0.5 {
        Ok(-t.inverse_cdf(1.0 - p))
    } else if p < 0.5 {
        Ok(t.inverse_cdf(p))
    } else {
        Ok(0.0)
    }
}

pub fn t_cdf(x: f64, df: u32) -> Result<f64> {
    Ok(dist(df)?.cdf(x))
}

pub fn t_density(x: f64, df: u32) -> Result<f64> {
    Ok(dist(df)?.pdf(x))
}

/// Draws one Student-t variate by inverse CDF of a uniform on (0,1).
pub fn t_sample<R: rand::Rng + ?Sized>(rng: &mut R, df: u32) -> Result<f64> {
    t_quantile(crate::rng::open_unit(rng), df)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn t_pdf_oracle(x: f64, df: f64) -> f64 {
        use statrs::function::gamma::ln_gamma;
        let c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
        (c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
    }

    #[test]
    fn examples() {
        assert_eq!(t_quantile(0.5, 5).unwrap(), 0.0);
        let cauchy = (std::f64::consts::PI * (0.025 - 0.5)).tan();
        assert_abs_diff_eq!(cauchy, -12.706, epsilon = 0.01);
        assert_abs_diff_eq!(t_quantile(0.025, 1).unwrap(), cauchy, epsilon = 1e-12);
        let q = t_quantile(0.975, 1000).unwrap();
        assert_abs_diff_eq!(q, 1.962, epsilon = 0.005);
        // Numeric integration of the density up to q recovers 0.975.
        let n = 200_000;
        let h = q / n as f64;
        let mut s = t_pdf_oracle(0.0, 1000.0) + t_pdf_oracle(q, 1000.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * t_pdf_oracle(i as f64 * h, 1000.0);
        }
        assert_abs_diff_eq!(0.5 + s * h / 3.0, 0.975, epsilon = 1e-8);
    }

    #[test]
    fn approaches_normal_limit() {
        let z = crate::stat_kernels::normal_quantile(0.95).unwrap();
        let mut prev = f64::INFINITY;
        for df in [2, 5, 30, 300, 30_000] {
            let q = t_quantile(0.95, df).unwrap();
            assert!(q > z && q < prev);
            prev = q;
        }
        assert_abs_diff_eq!(prev, z, epsilon = 1e-4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(t_quantile(0.0, 3).is_err());
        assert!(t_quantile(1.0, 3).is_err());
        assert!(t_quantile(0.3, 0).is_err());
    }

    proptest! {
        #[test]
        fn antisymmetric(p in 0.001..0.999f64, df in 1u32..200) {
            let a = t_quantile(p, df).unwrap();
            let b = t_quantile(1.0 - p, df).unwrap();
            prop_assert!((a + b).abs() <= 1e-9 * (1.0 + a.abs()));
        }

        #[test]
        fn monotone_and_inverts_cdf(p1 in 0.001..0.999f64, p2 in 0.001..0.999f64, df in 1u32..50) {
            let (lo, hi) = if p1 < p2 { (p1, p2) } else { (p2, p1) };
            prop_assert!(t_quantile(lo, df).unwrap() <= t_quantile(hi, df).unwrap());
            let q = t_quantile(p1, df).unwrap();
            prop_assert!((t_cdf(q, df).unwrap() - p1).abs() < 1e-9);
        }
    }
}
