use serde::{Deserialize, Serialize};

use crate::cdf_models::{cdf_quantile, CdfModel};
use crate::error::Result;

/// Quantile levels of the mean functional: midpoints of 512 equal cells.
pub const MEAN_GRID_POINTS: usize = 512;

/// Functional `J` applied to a conditional CDF to get a point prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Predictor {
    /// Minimizes squared error.
    #[default]
    #[serde(alias = "l2")]
    Mean,
    /// Minimizes absolute error.
    #[serde(alias = "l1")]
    Median,
}

impl Predictor {
    pub fn label(self) -> &'static str {
        match self {
            Predictor::Mean => "L2",
            Predictor::Median => "L1",
        }
    }
}

pub fn mean_grid() -> Vec<f64> {
    (0..MEAN_GRID_POINTS).map(|k| (k as f64 + 0.5) / MEAN_GRID_POINTS as f64).collect()
}

/// `J(F(. | x_f))`. The mean is `∫ F^{-1}(τ) dτ`, computed exactly when the
/// model knows it and by the midpoint rule on 512 levels otherwise.
pub fn point_predict<M: CdfModel + ?Sized>(model: &M, x_f: &[f64], predictor: Predictor) -> Result<f64> {
    match predictor {
        Predictor::Median => cdf_quantile(model, 0.5, x_f),
        Predictor::Mean => match model.mean(x_f) {
            Some(m) => m,
            None => {
                let q = model.quantiles(&mean_grid(), x_f)?;
                Ok(q.iter().sum::<f64>() / q.len() as f64)
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdf_models::{Dataset, EstimatorSpec};
    use approx::assert_abs_diff_eq;

    struct Exp1;

    impl CdfModel for Exp1 {
        fn cdf(&self, y: f64, _: &[f64]) -> Result<f64> {
            Ok(if y <= 0.0 { 0.0 } else { 1.0 - (-y).exp() })
        }
        fn quantile(&self, p: f64, _: &[f64]) -> Result<f64> {
            Ok(-(1.0 - p).ln())
        }
    }

    #[test]
    fn exponential_mean_and_median() {
        assert_abs_diff_eq!(point_predict(&Exp1, &[0.0], Predictor::Mean).unwrap(), 1.0, epsilon = 0.01);
        assert_abs_diff_eq!(point_predict(&Exp1, &[0.0], Predictor::Median).unwrap(), 2f64.ln(), epsilon = 1e-3);
    }

    #[test]
    fn symmetric_model_mean_equals_median() {
        let ds = Dataset::univariate(vec![0.0; 5], vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let m = EstimatorSpec::kernel(1.0, 0.3).fit(&ds).unwrap();
        let mean = point_predict(&m, &[0.0], Predictor::Mean).unwrap();
        let med = point_predict(&m, &[0.0], Predictor::Median).unwrap();
        assert_abs_diff_eq!(mean, 3.0, epsilon = 1e-3);
        assert_abs_diff_eq!(med, 3.0, epsilon = 1e-3);
    }

    #[test]
    fn closed_form_kernel_mean_matches_quadrature() {
        let ds = Dataset::univariate(vec![0.0, 0.1, 0.2, 0.3], vec![0.0, 1.0, 5.0, 2.0]).unwrap();
        let m = EstimatorSpec::kernel(0.5, 0.2).fit(&ds).unwrap();
        let q = m.quantiles(&mean_grid(), &[0.1]).unwrap();
        let quad = q.iter().sum::<f64>() / q.len() as f64;
        assert_abs_diff_eq!(point_predict(&m, &[0.1], Predictor::Mean).unwrap(), quad, epsilon = 5e-3);
    }
}
