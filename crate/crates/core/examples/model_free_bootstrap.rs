//! Model-free bootstrap: the three variants and both point predictors,
//! plus a look at the predictive roots.

use predint::cdf_models::auto_kernel_estimator;
use predint::experiments::gen_synthetic;
use predint::pi_methods::{mfb_interval, MfbConfig, MfbVariant, PredictionInterval, Predictor, Side};

pub struct MfbRow {
    pub label: String,
    pub interval: PredictionInterval,
    pub redrawn: usize,
}

pub fn run_example() -> predint::Result<Vec<MfbRow>> {
    let data = gen_synthetic(80, 0.2, 21)?;
    let est = auto_kernel_estimator(&data)?;
    let mut rows = Vec::new();
    for variant in [MfbVariant::Standard, MfbVariant::Limit, MfbVariant::Predictive] {
        for predictor in [Predictor::Mean, Predictor::Median] {
            let cfg = MfbConfig::new(400, 5).with_variant(variant).with_predictor(predictor);
            let (interval, roots) = mfb_interval(&data, &[0.5], 0.05, &est, &cfg, Side::Two)?;
            rows.push(MfbRow { label: format!("{variant:?}/{}", predictor.label()), interval, redrawn: roots.redrawn });
        }
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> predint::Result<()> {
    for r in run_example()? {
        println!("{:<14} {}  (redrawn replicates: {})", r.label, r.interval.display(), r.redrawn);
    }
    Ok(())
}
