//! Conjecture tests about the unobserved future response, decided by
//! whether the null set meets a prediction interval.

use serde::{Deserialize, Serialize};

use crate::cdf_models::{CdfModel, Dataset, EstimatorSpec};
use crate::error::{check_alpha, domain, Result};
use crate::pi_methods::{build_interval, qe_interval, MethodSpec, MethodTag, PredictionInterval, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullKind {
    /// `Y_f = y0`.
    Point,
    /// `Y_f >= y0`.
    AtLeast,
    /// `Y_f <= y0`.
    AtMost,
}

impl NullKind {
    /// Shape of the interval the test is read from.
    pub fn side(self) -> Side {
        match self {
            NullKind::Point => Side::Two,
            NullKind::AtLeast => Side::Lower,
            NullKind::AtMost => Side::Upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullSpec {
    pub kind: NullKind,
    pub y0: f64,
}

impl NullSpec {
    pub fn point(y0: f64) -> Self {
        Self { kind: NullKind::Point, y0 }
    }

    pub fn at_least(y0: f64) -> Self {
        Self { kind: NullKind::AtLeast, y0 }
    }

    pub fn at_most(y0: f64) -> Self {
        Self { kind: NullKind::AtMost, y0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub reject: bool,
    pub interval_used: PredictionInterval,
    pub alpha: f64,
    pub method: MethodTag,
}

/// Decides a null against an interval of the matching shape. The
/// acceptance region is closed: `y0` on an endpoint is not rejected.
pub fn decide(null: NullSpec, interval: PredictionInterval, alpha: f64) -> Result<Decision> {
    check_alpha(alpha)?;
    if null.y0.is_nan() {
        return domain("y0 must not be NaN");
    }
    if interval.side() != null.kind.side() {
        return domain(format!("{:?} null needs a {:?} interval, got {:?}", null.kind, null.kind.side(), interval.side()));
    }
    let reject = match null.kind {
        NullKind::Point => !interval.contains(null.y0),
        NullKind::AtLeast => null.y0 > interval.upper,
        NullKind::AtMost => null.y0 < interval.lower,
    };
    Ok(Decision { reject, method: interval.method, interval_used: interval, alpha })
}

/// Builds the interval the null calls for with `method`, then decides.
pub fn test_conjecture(
    data: &Dataset,
    x_f: &[f64],
    alpha: f64,
    null: NullSpec,
    estimator: &EstimatorSpec,
    method: &MethodSpec,
) -> Result<Decision> {
    let pi = build_interval(data, x_f, alpha, null.kind.side(), estimator, method)?;
    decide(null, pi, alpha)
}

/// As [`test_conjecture`] with a QE interval from an already fitted model,
/// e.g. the true conditional law.
pub fn test_conjecture_with_model<M: CdfModel + ?Sized>(model: &M, x_f: &[f64], alpha: f64, null: NullSpec) -> Result<Decision> {
    decide(null, qe_interval(model, x_f, alpha, null.kind.side())?, alpha)
}

/// Share of decisions that do not reject.
pub fn acceptance_rate(decisions: &[Decision]) -> Result<f64> {
    if decisions.is_empty() {
        return domain("acceptance rate of an empty list");
    }
    Ok(decisions.iter().filter(|d| !d.reject).count() as f64 / decisions.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pi_methods::{MfbConfig, Predictor};
    use crate::stat_kernels::{normal_cdf, normal_quantile};
    use rand::RngExt;

    struct Normal(f64);

    impl CdfModel for Normal {
        fn cdf(&self, y: f64, _: &[f64]) -> Result<f64> {
            Ok(normal_cdf(y - self.0))
        }
        fn quantile(&self, p: f64, _: &[f64]) -> Result<f64> {
            Ok(self.0 + normal_quantile(p)?)
        }
    }

    fn pi(lo: f64, hi: f64) -> PredictionInterval {
        PredictionInterval::new(lo, hi, 0.95, MethodTag::Mfb, None).unwrap()
    }

    #[test]
    fn center_is_never_rejected() {
        let d = decide(NullSpec::point(0.5), pi(0.0, 1.0), 0.05).unwrap();
        assert!(!d.reject);
    }

    #[test]
    fn at_least_rule() {
        assert!(decide(NullSpec::at_least(3.0), pi(f64::NEG_INFINITY, 2.0), 0.05).unwrap().reject);
        assert!(!decide(NullSpec::at_least(2.0), pi(f64::NEG_INFINITY, 2.0), 0.05).unwrap().reject);
        assert!(decide(NullSpec::at_most(-1.0), pi(0.0, f64::INFINITY), 0.05).unwrap().reject);
        assert!(!decide(NullSpec::at_most(0.0), pi(0.0, f64::INFINITY), 0.05).unwrap().reject);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        assert!(decide(NullSpec::at_least(3.0), pi(0.0, 2.0), 0.05).is_err());
    }

    #[test]
    fn normal_at_least() {
        let d = test_conjecture_with_model(&Normal(0.0), &[0.0], 0.05, NullSpec::at_least(1.7)).unwrap();
        assert!(d.reject);
        assert!((d.interval_used.upper - 1.6449).abs() < 1e-3);
        let d = test_conjecture_with_model(&Normal(0.0), &[0.0], 0.05, NullSpec::at_least(1.6)).unwrap();
        assert!(!d.reject);
    }

    #[test]
    fn acceptance_rates() {
        let acc = decide(NullSpec::point(0.5), pi(0.0, 1.0), 0.05).unwrap();
        let rej = decide(NullSpec::point(5.0), pi(0.0, 1.0), 0.05).unwrap();
        let v = vec![acc.clone(), acc.clone(), acc, rej.clone()];
        assert_eq!(acceptance_rate(&v).unwrap(), 0.75);
        assert_eq!(acceptance_rate(&[rej.clone(), rej]).unwrap(), 0.0);
        assert!(acceptance_rate(&[]).is_err());
    }

    #[test]
    fn oracle_size_control() {
        // Y_f ~ N(0, 1); the at-least null holds at y0 = Y_f, so rejections
        // are false rejections.
        let mut rng = crate::rng::seeded(10);
        let (r, alpha) = (2000, 0.1);
        let model = Normal(0.0);
        let decisions: Vec<Decision> = (0..r)
            .map(|_| {
                let y = normal_quantile(crate::rng::open_unit(&mut rng)).unwrap();
                test_conjecture_with_model(&model, &[0.0], alpha, NullSpec::at_least(y)).unwrap()
            })
            .collect();
        let rate = 1.0 - acceptance_rate(&decisions).unwrap();
        let se = (alpha * (1.0 - alpha) / r as f64).sqrt();
        assert!((rate - alpha).abs() <= 3.0 * se, "{rate}");
    }

    #[test]
    fn point_null_duality() {
        let mut rng = crate::rng::seeded(12);
        let x: Vec<f64> = (0..60).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = x.iter().map(|v| v + 0.2 * rng.random::<f64>()).collect();
        let ds = Dataset::univariate(x, y).unwrap();
        let est = EstimatorSpec::kernel(0.3, 0.05);
        let methods = [MethodSpec::Qe, MethodSpec::cp(), MethodSpec::Mfb(MfbConfig::new(100, 4).with_predictor(Predictor::Median))];
        for m in &methods {
            let pi = build_interval(&ds, &[0.5], 0.1, Side::Two, &est, m).unwrap();
            for y0 in [pi.lower - 1e-9, pi.lower, 0.5 * (pi.lower + pi.upper), pi.upper, pi.upper + 1e-9] {
                let d = test_conjecture(&ds, &[0.5], 0.1, NullSpec::point(y0), &est, m).unwrap();
                assert_eq!(d.reject, !pi.contains(y0));
            }
        }
    }
}
