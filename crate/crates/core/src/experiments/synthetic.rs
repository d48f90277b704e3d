use std::f64::consts::PI;

use rand::RngExt;

use crate::cdf_models::{CdfModel, Dataset};
use crate::error::{domain, Result};
use crate::rng::seeded;
use crate::stat_kernels::{t_cdf, t_quantile, t_sample};

pub const DEFAULT_SIGMA: f64 = 0.2;
/// Degrees of freedom of the noise.
pub const NOISE_DF: u32 = 5;

/// `X ~ U(0,1)`, `Y = sin(πX) + σ sqrt(1 + 2X) ε` with `ε ~ t_5`.
///
/// Also serves as the exact conditional law when an oracle is needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticModel {
    pub sigma: f64,
}

impl Default for SyntheticModel {
    fn default() -> Self {
        Self { sigma: DEFAULT_SIGMA }
    }
}

impl SyntheticModel {
    pub fn location(&self, x: f64) -> f64 {
        (PI * x).sin()
    }

    pub fn scale(&self, x: f64) -> f64 {
        self.sigma * (1.0 + 2.0 * x).sqrt()
    }

    pub fn sample_response<R: rand::Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        self.location(x) + self.scale(x) * t_sample(rng, NOISE_DF).expect("df is positive")
    }

    fn x(x: &[f64]) -> Result<f64> {
        match x {
            [v] => Ok(*v),
            _ => domain(format!("synthetic model takes one covariate, got {}", x.len())),
        }
    }
}

impl CdfModel for SyntheticModel {
    fn cdf(&self, y: f64, x: &[f64]) -> Result<f64> {
        let x = Self::x(x)?;
        t_cdf((y - self.location(x)) / self.scale(x), NOISE_DF)
    }

    fn quantile(&self, p: f64, x: &[f64]) -> Result<f64> {
        let x = Self::x(x)?;
        Ok(self.location(x) + self.scale(x) * t_quantile(p, NOISE_DF)?)
    }

    fn mean(&self, x: &[f64]) -> Option<Result<f64>> {
        Some(Self::x(x).map(|x| self.location(x)))
    }
}

/// `n` draws from [`SyntheticModel`], reproducible from `seed`.
pub fn gen_synthetic(n: usize, sigma: f64, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return domain("synthetic sample size must be positive");
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("sigma must be positive, got {sigma}"));
    }
    let model = SyntheticModel { sigma };
    let mut rng = seeded(seed);
    let mut x = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let xi: f64 = rng.random();
        y.push(model.sample_response(xi, &mut rng));
        x.push(xi);
    }
    Dataset::univariate(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn deterministic() {
        let a = gen_synthetic(50, 0.2, 5).unwrap();
        let b = gen_synthetic(50, 0.2, 5).unwrap();
        assert_eq!(a.y(), b.y());
        assert_eq!(a.xs(), b.xs());
        assert_ne!(gen_synthetic(50, 0.2, 6).unwrap().y(), a.y());
    }

    #[test]
    fn conditional_moments_at_one_half() {
        let model = SyntheticModel::default();
        assert_abs_diff_eq!(model.location(0.5), 1.0, epsilon = 1e-15);
        let mut rng = seeded(9);
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let y = model.sample_response(0.5, &mut rng);
            s += y;
            s2 += y * y;
        }
        let mean = s / n as f64;
        let sd = (s2 / n as f64 - mean * mean).sqrt();
        let want = 0.2 * 2f64.sqrt() * (5.0f64 / 3.0).sqrt();
        assert_abs_diff_eq!(want, 0.3651, epsilon = 1e-4);
        assert!((sd / want - 1.0).abs() < 0.005, "{sd}");
        assert_abs_diff_eq!(mean, 1.0, epsilon = 0.002);
    }

    #[test]
    fn oracle_round_trip() {
        let model = SyntheticModel::default();
        for p in [0.025, 0.5, 0.975] {
            let q = model.quantile(p, &[0.3]).unwrap();
            assert_abs_diff_eq!(model.cdf(q, &[0.3]).unwrap(), p, epsilon = 1e-9);
        }
        assert!(model.cdf(0.0, &[0.1, 0.2]).is_err());
    }
}
