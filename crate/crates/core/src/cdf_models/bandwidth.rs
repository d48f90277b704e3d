use crate::cdf_models::{clip_rank, Dataset, EstimatorSpec};
use crate::error::{domain, Error, Result};
use crate::stat_kernels::{ks_uniform_test, CdfKernel, KernelSpec};

use super::kernel::product_weight;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthChoice {
    pub h: f64,
    pub h0: f64,
    /// KS uniformity p-value of the plugin ranks at the chosen pair.
    pub p_value: f64,
}

/// `{0.05, 0.10, ..., 0.50}` times the covariate spread and the response
/// range. A zero range falls back to unit scale.
pub fn default_bandwidth_grids(data: &Dataset) -> (Vec<f64>, Vec<f64>) {
    let sx = match data.x_spread() {
        s if s > 0.0 => s,
        _ => 1.0,
    };
    let (lo, hi) = data.y_range();
    let sy = if hi > lo { hi - lo } else { 1.0 };
    let grid = |s: f64| (1..=10).map(|k| 0.05 * k as f64 * s).collect::<Vec<_>>();
    (grid(sx), grid(sy))
}

/// Picks the `(h, h0)` pair whose plugin ranks look most uniform (largest
/// KS p-value). Ties go to the smaller `h`, then the smaller `h0`.
pub fn select_bandwidths(data: &Dataset, h_grid: &[f64], h0_grid: &[f64], spec: KernelSpec) -> Result<BandwidthChoice> {
    if h_grid.is_empty() || h0_grid.is_empty() {
        return domain("bandwidth grids must be nonempty");
    }
    if h_grid.iter().chain(h0_grid).any(|&v| !(v > 0.0 && v.is_finite())) {
        return domain("bandwidths must be positive and finite");
    }
    let mut hs = h_grid.to_vec();
    let mut h0s = h0_grid.to_vec();
    hs.sort_by(f64::total_cmp);
    h0s.sort_by(f64::total_cmp);

    let n = data.n();
    let mut best: Option<BandwidthChoice> = None;
    for &h in &hs {
        // Sparse weight lists, shared by every h0.
        let nbrs: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|j| {
                        let w = product_weight(spec, h, data.x(j), data.x(i));
                        (w > 0.0).then_some((j, w))
                    })
                    .collect()
            })
            .collect();
        for &h0 in &h0s {
            let inv = 1.0 / h0;
            let ranks: Option<Vec<f64>> = (0..n)
                .map(|i| {
                    let (mut a, mut d) = (0.0, 0.0);
                    for &(j, w) in &nbrs[i] {
                        a += w * spec.cdf.cdf((data.y()[i] - data.y()[j]) * inv);
                        d += w;
                    }
                    (d > 0.0).then(|| clip_rank(a / d))
                })
                .collect();
            let Some(ranks) = ranks else { continue };
            let p_value = ks_uniform_test(&ranks)?.p_value;
            if best.is_none_or(|b| p_value > b.p_value) {
                best = Some(BandwidthChoice { h, h0, p_value });
            }
        }
    }
    best.ok_or_else(|| Error::Selection("every grid pair left some observation without kernel mass".into()))
}

/// Kernel estimator with data-driven bandwidths on the default grids.
///
/// A constant response has no scale to smooth over, so it gets the step
/// kernel (the `h0 -> 0` limit) and a degenerate fitted law.
pub fn auto_kernel_estimator(data: &Dataset) -> Result<EstimatorSpec> {
    let (hg, h0g) = default_bandwidth_grids(data);
    let (lo, hi) = data.y_range();
    if hi == lo {
        let kernel = KernelSpec { cdf: CdfKernel::Step, ..KernelSpec::default() };
        return Ok(EstimatorSpec::Kernel { h: hg[hg.len() - 1], h0: h0g[0], kernel });
    }
    let c = select_bandwidths(data, &hg, &h0g, KernelSpec::default())?;
    Ok(EstimatorSpec::kernel(c.h, c.h0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdf_models::{pit_ranks, EstimatorSpec, RankVariant};
    use rand::RngExt;

    fn sample(n: usize, seed: u64) -> Dataset {
        let mut rng = crate::rng::seeded(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&v| {
                let e = crate::stat_kernels::t_sample(&mut rng, 5).unwrap();
                (std::f64::consts::PI * v).sin() + 0.2 * (1.0 + 2.0 * v).sqrt() * e
            })
            .collect();
        Dataset::univariate(x, y).unwrap()
    }

    fn ks_p(data: &Dataset, h: f64, h0: f64) -> f64 {
        let r = pit_ranks(&EstimatorSpec::kernel(h, h0), data, RankVariant::Plugin).unwrap();
        ks_uniform_test(&r.u).unwrap().p_value
    }

    #[test]
    fn singleton_grids() {
        let ds = sample(50, 1);
        let c = select_bandwidths(&ds, &[0.3], &[0.2], KernelSpec::default()).unwrap();
        assert_eq!((c.h, c.h0), (0.3, 0.2));
    }

    #[test]
    fn picks_the_larger_p_value() {
        let ds = sample(200, 2);
        let c = select_bandwidths(&ds, &[0.1, 0.2], &[0.1], KernelSpec::default()).unwrap();
        let (p1, p2) = (ks_p(&ds, 0.1, 0.1), ks_p(&ds, 0.2, 0.1));
        let want = if p2 > p1 { 0.2 } else { 0.1 };
        assert_eq!(c.h, want);
        assert!((c.p_value - p1.max(p2)).abs() < 1e-12);
    }

    #[test]
    fn ties_prefer_smaller_bandwidths() {
        // Constant responses give identical ranks for every pair.
        let ds = Dataset::univariate(vec![0.0, 0.5, 1.0], vec![1.0; 3]).unwrap();
        let c = select_bandwidths(&ds, &[2.0, 1.0], &[0.3, 0.1], KernelSpec::default()).unwrap();
        assert_eq!((c.h, c.h0), (1.0, 0.1));
    }

    #[test]
    fn selected_ranks_pass_ks() {
        let ds = sample(500, 3);
        let (hg, h0g) = default_bandwidth_grids(&ds);
        let c = select_bandwidths(&ds, &hg, &h0g, KernelSpec::default()).unwrap();
        assert!(c.p_value > 0.05, "{c:?}");
        assert!((ks_p(&ds, c.h, c.h0) - c.p_value).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        let ds = sample(10, 4);
        assert!(select_bandwidths(&ds, &[], &[0.1], KernelSpec::default()).is_err());
        assert!(select_bandwidths(&ds, &[0.1], &[-1.0], KernelSpec::default()).is_err());
    }

    #[test]
    fn constant_response_gets_step_kernel() {
        let ds = Dataset::univariate(vec![0.1, 0.4, 0.9], vec![2.0; 3]).unwrap();
        let spec = auto_kernel_estimator(&ds).unwrap();
        let m = spec.fit(&ds).unwrap();
        use crate::cdf_models::CdfModel;
        assert_eq!(m.quantile(0.01, &[0.5]).unwrap(), 2.0);
        assert_eq!(m.quantile(0.99, &[0.5]).unwrap(), 2.0);
    }
}
