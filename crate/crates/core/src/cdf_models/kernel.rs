use crate::cdf_models::{CdfModel, Dataset};
use crate::error::{domain, Error, Result};
use crate::stat_kernels::{CdfKernel, KernelSpec};

/// Kernel estimator of the conditional CDF,
///
/// ```text
/// F(y | x) = Σ W_h(X_i, x) K((y - Y_i) / h0) / Σ W_h(X_i, x)
/// ```
///
/// with product weights `W_h(X_i, x) = Π_s w((X_is - x_s) / h)`.
#[derive(Debug, Clone)]
pub struct KernelCdfModel {
    data: Dataset,
    h: f64,
    h0: f64,
    spec: KernelSpec,
}

pub fn fit_kernel_cdf(data: &Dataset, h: f64, h0: f64, spec: KernelSpec) -> Result<KernelCdfModel> {
    if !(h > 0.0 && h.is_finite() && h0 > 0.0 && h0.is_finite()) {
        return domain(format!("bandwidths must be positive and finite, got h = {h}, h0 = {h0}"));
    }
    Ok(KernelCdfModel { data: data.clone(), h, h0, spec })
}

impl KernelCdfModel {
    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn spec(&self) -> KernelSpec {
        self.spec
    }

    /// Unnormalized product weight between two covariate points.
    #[inline]
    pub fn weight(&self, a: &[f64], b: &[f64]) -> f64 {
        product_weight(self.spec, self.h, a, b)
    }

    /// The conditional law at `x` as a weighted mixture of smoothed atoms.
    pub fn local(&self, x: &[f64]) -> Result<LocalCdf> {
        let mut ys = Vec::new();
        let mut ws = Vec::new();
        for i in 0..self.data.n() {
            let w = self.weight(self.data.x(i), x);
            if w > 0.0 {
                ys.push(self.data.y()[i]);
                ws.push(w);
            }
        }
        LocalCdf::new(ys, ws, self.h0, self.spec.cdf).ok_or_else(|| Error::OutOfSupport(x.to_vec()))
    }
}

#[inline]
pub(crate) fn product_weight(spec: KernelSpec, h: f64, a: &[f64], b: &[f64]) -> f64 {
    let mut w = 1.0;
    for (u, v) in a.iter().zip(b) {
        w *= spec.weight.eval((u - v) / h);
        if w == 0.0 {
            break;
        }
    }
    w
}

impl CdfModel for KernelCdfModel {
    fn cdf(&self, y: f64, x: &[f64]) -> Result<f64> {
        Ok(self.local(x)?.cdf(y))
    }

    fn quantile(&self, p: f64, x: &[f64]) -> Result<f64> {
        Ok(self.local(x)?.quantile(p))
    }

    fn quantiles(&self, ps: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.local(x)?.quantiles(ps))
    }

    /// Every supported `K` is symmetric, so the mixture mean is the weighted
    /// mean of the atoms.
    fn mean(&self, x: &[f64]) -> Option<Result<f64>> {
        Some(self.local(x).map(|l| l.mean()))
    }
}

/// Mixture `Σ w_j K((y - y_j) / h0)` with weights summing to one.
#[derive(Debug, Clone)]
pub struct LocalCdf {
    ys: Vec<f64>,
    ws: Vec<f64>,
    h0: f64,
    kind: CdfKernel,
    y_min: f64,
    y_max: f64,
}

const TABLE_POINTS: usize = 256;

impl LocalCdf {
    /// Returns `None` when the weights carry no mass.
    pub fn new(ys: Vec<f64>, mut ws: Vec<f64>, h0: f64, kind: CdfKernel) -> Option<Self> {
        let total: f64 = ws.iter().sum();
        if !(total > 0.0) {
            return None;
        }
        ws.iter_mut().for_each(|w| *w /= total);
        let (mut ys, mut ws) = (ys, ws);
        if kind == CdfKernel::Step {
            let mut pairs: Vec<(f64, f64)> = ys.into_iter().zip(ws).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            (ys, ws) = pairs.into_iter().unzip();
        }
        let (y_min, y_max) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Some(Self { ys, ws, h0, kind, y_min, y_max })
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y == f64::NEG_INFINITY {
            return 0.0;
        }
        if y == f64::INFINITY {
            return 1.0;
        }
        let inv = 1.0 / self.h0;
        let s: f64 = self.ys.iter().zip(&self.ws).map(|(&yi, &w)| w * self.kind.cdf((y - yi) * inv)).sum();
        s.clamp(0.0, 1.0)
    }

    fn cdf_density(&self, y: f64) -> (f64, f64) {
        let inv = 1.0 / self.h0;
        let mut c = 0.0;
        let mut d = 0.0;
        for (&yi, &w) in self.ys.iter().zip(&self.ws) {
            let v = (y - yi) * inv;
            c += w * self.kind.cdf(v);
            d += w * self.kind.density(v);
        }
        (c.clamp(0.0, 1.0), d * inv)
    }

    /// Weighted mean of the atoms; the mean of the mixture for symmetric `K`.
    pub fn mean(&self) -> f64 {
        // Centering keeps constant atoms exact.
        self.y_min + self.ys.iter().zip(&self.ws).map(|(y, w)| (y - self.y_min) * w).sum::<f64>()
    }

    /// Inversion bracket `[min − 3 h0, max + 3 h0]`, widened until it
    /// straddles level `p`.
    fn bracket(&self, p: f64) -> (f64, f64) {
        let mut lo = self.y_min - 3.0 * self.h0;
        let mut hi = self.y_max + 3.0 * self.h0;
        let mut step = 3.0 * self.h0;
        while self.cdf(lo) >= p && step < 1e6 * self.h0 {
            lo -= step;
            step *= 2.0;
        }
        step = 3.0 * self.h0;
        while self.cdf(hi) < p && step < 1e6 * self.h0 {
            hi += step;
            step *= 2.0;
        }
        (lo, hi)
    }

    /// `inf { y : F(y) >= p }`.
    pub fn quantile(&self, p: f64) -> f64 {
        if self.kind == CdfKernel::Step {
            return self.step_quantile(p);
        }
        let (lo, hi) = self.bracket(p);
        self.solve(p, lo, hi, 0.5 * (lo + hi), 1e-8 * (hi - lo))
    }

    /// Many quantiles at once: a coarse table locates each level, then the
    /// safeguarded Newton iteration polishes it.
    pub fn quantiles(&self, ps: &[f64]) -> Vec<f64> {
        if self.kind == CdfKernel::Step {
            return ps.iter().map(|&p| self.step_quantile(p)).collect();
        }
        if ps.len() < 8 {
            return ps.iter().map(|&p| self.quantile(p)).collect();
        }
        let p_min = ps.iter().copied().fold(1.0, f64::min);
        let p_max = ps.iter().copied().fold(0.0, f64::max);
        let (lo, _) = self.bracket(p_min);
        let (_, hi) = self.bracket(p_max);
        let tol = 1e-8 * (hi - lo);
        let step = (hi - lo) / (TABLE_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..TABLE_POINTS).map(|i| lo + i as f64 * step).collect();
        let table: Vec<f64> = grid.iter().map(|&g| self.cdf(g)).collect();
        ps.iter()
            .map(|&p| {
                // First node with F >= p; the level sits in the cell before it.
                let k = table.partition_point(|&c| c < p).clamp(1, TABLE_POINTS - 1);
                let (a, b) = (grid[k - 1], grid[k]);
                let (fa, fb) = (table[k - 1], table[k]);
                let guess = if fb > fa { a + (p - fa) / (fb - fa) * (b - a) } else { 0.5 * (a + b) };
                if fa >= p {
                    // Only possible at the left edge of the table.
                    self.solve(p, self.bracket(p).0, b, guess, tol)
                } else {
                    self.solve(p, a, b, guess, tol)
                }
            })
            .collect()
    }

    /// Safeguarded Newton on `F(y) = p` keeping `F(lo) < p <= F(hi)`.
    fn solve(&self, p: f64, mut lo: f64, mut hi: f64, guess: f64, tol: f64) -> f64 {
        let mut y = guess.clamp(lo, hi);
        for _ in 0..200 {
            let (c, dens) = self.cdf_density(y);
            let f = c - p;
            if f >= 0.0 {
                hi = y;
            } else {
                lo = y;
            }
            if hi - lo <= tol {
                return hi;
            }
            let newton = if dens > 0.0 { y - f / dens } else { f64::NAN };
            if newton.is_finite() && newton > lo && newton < hi {
                if (newton - y).abs() <= 0.5 * tol {
                    return newton;
                }
                y = newton;
            } else {
                y = 0.5 * (lo + hi);
            }
        }
        hi
    }

    fn step_quantile(&self, p: f64) -> f64 {
        let mut cum = 0.0;
        for (&y, &w) in self.ys.iter().zip(&self.ws) {
            cum += w;
            if cum >= p - 1e-12 {
                return y;
            }
        }
        self.y_max
    }
}
