//! Prediction-interval constructions.

mod baseline;
mod cp;
mod interval;
mod mfb;
mod predictor;
mod qe;

use serde::{Deserialize, Serialize};

pub use baseline::{baseline_ls_interval, baseline_t_interval, leverage, MAX_CONDITION};
pub use cp::{conformity_score, cp_interval, cp_p_value, cp_p_values, CandidateGrid, CpMode, SCORE_TIE_TOL};
pub use interval::{MethodTag, PredictionInterval, Side};
pub use mfb::{mfb_interval, mfb_roots, MfbConfig, MfbVariant, RootSample, Scheme, MAX_FAILED_SHARE, MAX_REDRAWS, MIN_REPLICATES};
pub use predictor::{mean_grid, point_predict, Predictor, MEAN_GRID_POINTS};
pub use qe::qe_interval;

use crate::cdf_models::{Dataset, EstimatorSpec};
use crate::error::Result;

/// A method together with its own settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum MethodSpec {
    Qe,
    Cp {
        /// `None` picks [`CpMode::default_for`].
        #[serde(default)]
        mode: Option<CpMode>,
        #[serde(default)]
        grid: CandidateGrid,
    },
    Mfb(MfbConfig),
    TIid,
    TLs,
}

impl MethodSpec {
    pub fn cp() -> Self {
        MethodSpec::Cp { mode: None, grid: CandidateGrid::default() }
    }

    /// Short label used in reports, e.g. `MFB-L2`.
    pub fn label(&self) -> String {
        match self {
            MethodSpec::Qe => "QE".into(),
            MethodSpec::Cp { .. } => "CP".into(),
            MethodSpec::Mfb(c) => format!("MFB-{}", c.predictor.label()),
            MethodSpec::TIid => "T_IID".into(),
            MethodSpec::TLs => "T_LS".into(),
        }
    }

    /// Same method with its random seed replaced, for repeated use.
    pub fn reseeded(&self, seed: u64) -> Self {
        match self {
            MethodSpec::Mfb(c) => MethodSpec::Mfb(MfbConfig { seed, ..c.clone() }),
            other => other.clone(),
        }
    }
}

/// Builds a prediction interval for `x_f` with any method.
///
/// The estimator is ignored by the two Gaussian baselines; `T_LS` uses the
/// design exactly as stored in `data`.
pub fn build_interval(
    data: &Dataset,
    x_f: &[f64],
    alpha: f64,
    side: Side,
    estimator: &EstimatorSpec,
    method: &MethodSpec,
) -> Result<PredictionInterval> {
    match method {
        MethodSpec::Qe => qe_interval(&estimator.fit(data)?, x_f, alpha, side),
        MethodSpec::Cp { mode, grid } => {
            let mode = mode.unwrap_or_else(|| CpMode::default_for(estimator, data.n()));
            cp_interval(data, x_f, alpha, estimator, side, mode, grid)
        }
        MethodSpec::Mfb(cfg) => Ok(mfb_interval(data, x_f, alpha, estimator, cfg, side)?.0),
        MethodSpec::TIid => baseline_t_interval(data.y(), alpha, side),
        MethodSpec::TLs => baseline_ls_interval(data, x_f, alpha, side),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_spec_serde() {
        for m in [MethodSpec::Qe, MethodSpec::cp(), MethodSpec::Mfb(MfbConfig::new(500, 3)), MethodSpec::TLs] {
            let s = serde_json::to_string(&m).unwrap();
            assert_eq!(serde_json::from_str::<MethodSpec>(&s).unwrap(), m);
        }
        assert_eq!(MethodSpec::Mfb(MfbConfig::new(100, 0).with_predictor(Predictor::Median)).label(), "MFB-L1");
    }
}
