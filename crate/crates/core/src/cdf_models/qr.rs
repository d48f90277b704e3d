//! Linear quantile regression and the conditional CDF built from it.
//!
//! The solver runs iteratively reweighted least squares on the check loss,
//! annealing the residual floor, then snaps to the nearest basic solution
//! (`d + 1` interpolated points) and pivots between bases until the dual
//! multipliers certify optimality.

use nalgebra::{DMatrix, DVector};

use crate::cdf_models::{CdfModel, Dataset};
use crate::error::{domain, Error, Result};
use crate::stat_kernels::check_loss_unchecked;

/// Default grid `{0.01 i : 1 <= i <= 99}`.
pub fn default_tau_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct QrFit {
    /// Intercept first, then one slope per covariate.
    pub beta: Vec<f64>,
    pub objective: f64,
    pub irls_iterations: usize,
    pub pivots: usize,
}

#[inline]
fn predict(beta: &[f64], x: &[f64]) -> f64 {
    beta[0] + beta[1..].iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
}

/// Check-loss objective `Σ ρ_τ(Y_i − [1, X_i] β)`.
pub fn qr_objective(data: &Dataset, beta: &[f64], tau: f64) -> f64 {
    (0..data.n())
        .map(|i| check_loss_unchecked(data.y()[i] - predict(beta, data.x(i)), tau))
        .sum()
}

/// Design rows `[1, X_i]` with identical observations merged into one
/// weighted row. Bootstrap resamples repeat rows heavily, and exact
/// duplicates make the vertex search degenerate.
struct Rows {
    x: Vec<f64>,
    y: Vec<f64>,
    w: Vec<f64>,
    p: usize,
    scale: f64,
}

impl Rows {
    fn new(data: &Dataset) -> Self {
        let p = data.d() + 1;
        let key = |i: usize| -> Vec<u64> {
            let mut k: Vec<u64> = data.x(i).iter().map(|v| v.to_bits()).collect();
            k.push(data.y()[i].to_bits());
            k
        };
        let mut order: Vec<usize> = (0..data.n()).collect();
        order.sort_by_key(|&i| key(i));
        let (mut x, mut y, mut w) = (Vec::new(), Vec::new(), Vec::<f64>::new());
        let mut last: Option<Vec<u64>> = None;
        for i in order {
            let k = key(i);
            if last.as_ref() == Some(&k) {
                *w.last_mut().unwrap() += 1.0;
                continue;
            }
            x.push(1.0);
            x.extend_from_slice(data.x(i));
            y.push(data.y()[i]);
            w.push(1.0);
            last = Some(k);
        }
        let scale = spread(data.y());
        Rows { x, y, w, p, scale }
    }

    fn len(&self) -> usize {
        self.y.len()
    }

    fn perturbed(&self) -> Self {
        let delta = 1e-9 * self.scale;
        let y = self
            .y
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let h = crate::rng::derive_seed(0x5eed, i as u64);
                v + delta * ((h >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
            })
            .collect();
        Rows { x: self.x.clone(), y, w: self.w.clone(), p: self.p, scale: self.scale }
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    #[inline]
    fn fitted(&self, beta: &[f64], i: usize) -> f64 {
        self.row(i).iter().zip(beta).map(|(a, b)| a * b).sum()
    }

    fn objective(&self, beta: &[f64], tau: f64) -> f64 {
        (0..self.len()).map(|i| self.w[i] * check_loss_unchecked(self.y[i] - self.fitted(beta, i), tau)).sum()
    }

    fn basis_matrix(&self, basis: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(basis.len(), self.p, |r, c| self.row(basis[r])[c])
    }
}

fn solve(a: DMatrix<f64>, b: DVector<f64>) -> Option<DVector<f64>> {
    a.lu().solve(&b).filter(|v| v.iter().all(|x| x.is_finite()))
}

fn spread(y: &[f64]) -> f64 {
    let mut s = y.to_vec();
    s.sort_by(f64::total_cmp);
    let med = s[s.len() / 2];
    let mad = y.iter().map(|v| (v - med).abs()).sum::<f64>() / y.len() as f64;
    if mad > 0.0 {
        mad
    } else {
        1.0
    }
}

/// Fits one quantile level.
pub fn fit_quantile_regression(data: &Dataset, tau: f64) -> Result<QrFit> {
    fit_quantile_regression_from(data, tau, None)
}

/// As [`fit_quantile_regression`], but starts from `init` when given.
pub fn fit_quantile_regression_from(data: &Dataset, tau: f64, init: Option<&[f64]>) -> Result<QrFit> {
    check_size(data)?;
    fit_rows(&Rows::new(data), tau, init)
}

fn check_size(data: &Dataset) -> Result<()> {
    let (n, p) = (data.n(), data.d() + 1);
    if n <= p {
        return domain(format!("quantile regression needs n > d + 1 (n = {n}, d = {})", data.d()));
    }
    Ok(())
}

fn fit_rows(rows: &Rows, tau: f64, init: Option<&[f64]>) -> Result<QrFit> {
    if !(tau > 0.0 && tau < 1.0) {
        return domain(format!("tau must be in (0,1), got {tau}"));
    }
    let p = rows.p;
    let scale = rows.scale;
    // A warm start is typically a neighbouring vertex already, so pivoting
    // alone reaches the optimum in a handful of exchanges.
    let mut iterations = 0;
    let beta = match init {
        Some(b) if b.len() == p && b.iter().all(|v| v.is_finite()) => b.to_vec(),
        _ => {
            let mut beta = irls_step(rows, tau, None).ok_or_else(|| {
                Error::Fit(format!("least-squares start is singular (tau = {tau}, {} distinct rows, p = {p})", rows.len()))
            })?;
            for eps in [1e-2, 1e-4, 1e-6] {
                let floor = eps * scale;
                let mut obj = rows.objective(&beta, tau);
                for _ in 0..40 {
                    iterations += 1;
                    let Some(next) = irls_step(rows, tau, Some((&beta, floor))) else {
                        return Err(Error::Fit(format!(
                            "reweighted system singular at iteration {iterations} (tau = {tau}, floor = {floor:e})"
                        )));
                    };
                    let next_obj = rows.objective(&next, tau);
                    beta = next;
                    let done = (obj - next_obj).abs() <= 1e-10 * (obj + scale);
                    obj = next_obj;
                    if done {
                        break;
                    }
                }
            }
            beta
        }
    };

    let (beta, pivots) = match refine_vertex(rows, tau, beta.clone(), 3 * rows.len() + 50) {
        Ok(v) => v,
        // Many points exactly on one hyperplane can stall the exchange;
        // tiny response perturbations put the rows in general position.
        Err(Error::Fit(_)) => refine_vertex(&rows.perturbed(), tau, beta, 50 * rows.len() + 1000)?,
        Err(e) => return Err(e),
    };
    let objective = rows.objective(&beta, tau);
    Ok(QrFit { beta, objective, irls_iterations: iterations, pivots })
}

/// One reweighted least-squares solve. Without weights this is plain OLS.
fn irls_step(rows: &Rows, tau: f64, weights: Option<(&[f64], f64)>) -> Option<Vec<f64>> {
    let p = rows.p;
    let mut a = DMatrix::<f64>::zeros(p, p);
    let mut b = DVector::<f64>::zeros(p);
    for i in 0..rows.len() {
        let xi = rows.row(i);
        let y = rows.y[i];
        let (w, shift) = match weights {
            Some((beta, floor)) => {
                let r = y - rows.fitted(beta, i);
                (rows.w[i] / r.abs().max(floor), rows.w[i] * (2.0 * tau - 1.0))
            }
            None => (rows.w[i], 0.0),
        };
        for j in 0..p {
            b[j] += xi[j] * (w * y + shift);
            for k in j..p {
                a[(j, k)] += w * xi[j] * xi[k];
            }
        }
    }
    for j in 0..p {
        for k in 0..j {
            a[(j, k)] = a[(k, j)];
        }
    }
    solve(a, b).map(|v| v.iter().copied().collect())
}

/// Snaps to a basic solution near `beta` and pivots until optimal.
///
/// At a basis `B` the multipliers solve `X_B' λ = -Σ_{i∉B} w_i ψ_i x_i` and
/// the vertex is optimal when `λ_j ∈ [w_j (τ-1), w_j τ]`. Otherwise the
/// violated point leaves the basis and a line search over the residual
/// sign changes picks the point that enters. Ties resolve to the smallest
/// index, which rules out cycling.
fn refine_vertex(rows: &Rows, tau: f64, beta: Vec<f64>, max_pivots: usize) -> Result<(Vec<f64>, usize)> {
    let n = rows.len();
    let p = rows.p;
    let zero_tol = 1e-12 * rows.scale;

    // Greedy basis: smallest residuals first, skipping dependent rows.
    let resid: Vec<f64> = (0..n).map(|i| (rows.y[i] - rows.fitted(&beta, i)).abs()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| resid[a].total_cmp(&resid[b]).then(a.cmp(&b)));
    let mut basis: Vec<usize> = Vec::with_capacity(p);
    for &i in &order {
        let mut trial = basis.clone();
        trial.push(i);
        if rows.basis_matrix(&trial).rank(1e-10) == trial.len() {
            basis = trial;
            if basis.len() == p {
                break;
            }
        }
    }
    if basis.len() < p {
        // Rank-deficient design: keep the reweighted solution.
        return Ok((beta, 0));
    }
    let yb = DVector::from_iterator(p, basis.iter().map(|&i| rows.y[i]));
    let Some(sol) = solve(rows.basis_matrix(&basis), yb) else {
        return Ok((beta, 0));
    };
    let mut cur: Vec<f64> = sol.iter().copied().collect();

    let mut in_basis = vec![false; n];
    basis.iter().for_each(|&i| in_basis[i] = true);
    let mut r = vec![0.0; n];
    for pivots in 0..max_pivots {
        let mut objective = 0.0;
        for i in 0..n {
            r[i] = if in_basis[i] { 0.0 } else { rows.y[i] - rows.fitted(&cur, i) };
            objective += rows.w[i] * check_loss_unchecked(r[i], tau);
        }
        if objective <= 1e-14 * rows.scale * n as f64 {
            return Ok((cur, pivots));
        }
        let mut g = DVector::<f64>::zeros(p);
        for i in (0..n).filter(|&i| !in_basis[i]) {
            let psi = if r[i] >= -zero_tol { tau } else { tau - 1.0 };
            for (c, x) in rows.row(i).iter().enumerate() {
                g[c] += rows.w[i] * psi * x;
            }
        }
        let xb = rows.basis_matrix(&basis);
        let Some(lambda) = solve(xb.transpose(), -g) else {
            return Err(Error::Fit(format!("singular basis {basis:?} at pivot {pivots} (tau = {tau})")));
        };
        // Leaving point: the violated bound with the smallest row index.
        let mut leave: Option<(usize, f64)> = None;
        for (j, &l) in lambda.iter().enumerate() {
            let wj = rows.w[basis[j]];
            let s = if l > wj * tau + 1e-9 {
                1.0
            } else if l < wj * (tau - 1.0) - 1e-9 {
                -1.0
            } else {
                continue;
            };
            if leave.is_none_or(|(k, _)| basis[j] < basis[k]) {
                leave = Some((j, s));
            }
        }
        let Some((j, s)) = leave else {
            return Ok((cur, pivots));
        };
        let wj = rows.w[basis[j]];
        let mut e = DVector::<f64>::zeros(p);
        e[j] = -1.0;
        let Some(dir) = solve(xb, e) else {
            return Err(Error::Fit(format!("singular basis at pivot {pivots} (tau = {tau})")));
        };
        let dir: Vec<f64> = dir.iter().copied().collect();
        let mut slope = if s > 0.0 { wj * tau - lambda[j] } else { wj * (1.0 - tau) + lambda[j] };
        let mut breaks: Vec<(f64, f64, usize)> = Vec::new();
        for i in (0..n).filter(|&i| !in_basis[i]) {
            let c = s * rows.row(i).iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>();
            let positive = r[i] >= -zero_tol;
            if (positive && c > 0.0) || (!positive && c < 0.0) {
                breaks.push(((r[i] / c).max(0.0), rows.w[i] * c.abs(), i));
            }
        }
        breaks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
        let mut entering = None;
        for &(t, jump, i) in &breaks {
            slope += jump;
            if slope >= 0.0 {
                entering = Some((t, i));
                break;
            }
        }
        let Some((t, k)) = entering else {
            return Err(Error::Fit(format!("unbounded pivot direction at pivot {pivots} (tau = {tau})")));
        };
        for (b, dv) in cur.iter_mut().zip(&dir) {
            *b += t * s * dv;
        }
        in_basis[basis[j]] = false;
        basis[j] = k;
        in_basis[k] = true;
    }
    Err(Error::Fit(format!(
        "no optimality certificate after {max_pivots} pivots (tau = {tau}, objective = {})",
        rows.objective(&cur, tau)
    )))
}

/// Conditional CDF assembled from a grid of fitted quantile lines.
///
/// Quantile curves are rearranged (sorted across τ) at each evaluation point
/// so they never cross, and the CDF is the discretized integral
/// `F(y|x) = |{τ : q(τ|x) <= y}| / |grid|`.
#[derive(Debug, Clone)]
pub struct QrCdfModel {
    taus: Vec<f64>,
    betas: Vec<Vec<f64>>,
    d: usize,
}

pub fn fit_qr_cdf(data: &Dataset, taus: &[f64]) -> Result<QrCdfModel> {
    fit_qr_cdf_from(data, taus, None)
}

/// Fits every level, warm-starting each from `init` or the previous level.
pub fn fit_qr_cdf_from(data: &Dataset, taus: &[f64], init: Option<&QrCdfModel>) -> Result<QrCdfModel> {
    if taus.is_empty() {
        return domain("tau grid is empty");
    }
    if taus.iter().any(|&t| !(t > 0.0 && t < 1.0)) || taus.windows(2).any(|w| w[0] >= w[1]) {
        return domain("tau grid must be strictly ascending inside (0,1)");
    }
    check_size(data)?;
    let rows = Rows::new(data);
    let init = init.filter(|m| m.taus == taus && m.d == data.d());
    let mut betas: Vec<Vec<f64>> = Vec::with_capacity(taus.len());
    for (k, &tau) in taus.iter().enumerate() {
        let start = init.map(|m| m.betas[k].as_slice()).or(betas.last().map(Vec::as_slice));
        betas.push(fit_rows(&rows, tau, start)?.beta);
    }
    Ok(QrCdfModel { taus: taus.to_vec(), betas, d: data.d() })
}

impl QrCdfModel {
    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn betas(&self) -> &[Vec<f64>] {
        &self.betas
    }

    /// Monotonized quantile curve at `x`, one value per grid level.
    pub fn quantile_curve(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return domain(format!("covariate has {} coordinates, model expects {}", x.len(), self.d));
        }
        let mut q: Vec<f64> = self.betas.iter().map(|b| predict(b, x)).collect();
        q.sort_by(f64::total_cmp);
        Ok(q)
    }

    #[inline]
    pub(crate) fn curve_quantile(curve: &[f64], p: f64) -> f64 {
        let m = curve.len() as f64;
        let k = (p * m - 1e-9 * p * m).ceil().clamp(1.0, m) as usize;
        curve[k - 1]
    }

    #[inline]
    pub(crate) fn curve_cdf(curve: &[f64], y: f64) -> f64 {
        curve.partition_point(|&q| q <= y) as f64 / curve.len() as f64
    }
}

impl CdfModel for QrCdfModel {
    fn cdf(&self, y: f64, x: &[f64]) -> Result<f64> {
        Ok(Self::curve_cdf(&self.quantile_curve(x)?, y))
    }

    fn quantile(&self, p: f64, x: &[f64]) -> Result<f64> {
        Ok(Self::curve_quantile(&self.quantile_curve(x)?, p))
    }

    fn quantiles(&self, ps: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let curve = self.quantile_curve(x)?;
        Ok(ps.iter().map(|&p| Self::curve_quantile(&curve, p)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::RngExt;

    /// Exhaustive search over lines through pairs of points; exact for p = 2.
    fn pair_basis_oracle(data: &Dataset, tau: f64) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..data.n() {
            for j in (i + 1)..data.n() {
                let (xi, xj) = (data.x(i)[0], data.x(j)[0]);
                if (xi - xj).abs() < 1e-12 {
                    continue;
                }
                let slope = (data.y()[j] - data.y()[i]) / (xj - xi);
                let icpt = data.y()[i] - slope * xi;
                best = best.min(qr_objective(data, &[icpt, slope], tau));
            }
        }
        best
    }

    fn random_instance(rng: &mut crate::rng::SimRng, n: usize) -> Dataset {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = x.iter().map(|&v| 0.5 - v + rng.random_range(-1.0..1.0)).collect();
        Dataset::univariate(x, y).unwrap()
    }

    #[test]
    fn exact_line_is_recovered() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 / 3.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let ds = Dataset::univariate(x, y).unwrap();
        for tau in [0.1, 0.5, 0.9] {
            let fit = fit_quantile_regression(&ds, tau).unwrap();
            assert_abs_diff_eq!(fit.beta[0], 0.0, epsilon = 1e-4);
            assert_abs_diff_eq!(fit.beta[1], 2.0, epsilon = 1e-4);
        }
    }

    #[test]
    fn matches_pair_basis_oracle() {
        let mut rng = crate::rng::seeded(21);
        for trial in 0..200 {
            let n = 3 + trial % 6;
            let ds = random_instance(&mut rng, n);
            for tau in [0.1, 0.3, 0.5, 0.77] {
                let fit = fit_quantile_regression(&ds, tau).unwrap();
                let oracle = pair_basis_oracle(&ds, tau);
                assert!(
                    fit.objective <= oracle + 1e-9,
                    "trial {trial} tau {tau}: fit {} vs oracle {oracle}",
                    fit.objective
                );
            }
        }
    }

    #[test]
    fn larger_instances_reach_certified_optimum() {
        let mut rng = crate::rng::seeded(8);
        let ds = random_instance(&mut rng, 400);
        let fit = fit_quantile_regression(&ds, 0.2).unwrap();
        // Perturbing the solution in any direction cannot lower the objective.
        for (da, db) in [(1e-4, 0.0), (-1e-4, 0.0), (0.0, 1e-4), (0.0, -1e-4), (1e-4, -1e-4)] {
            let b = [fit.beta[0] + da, fit.beta[1] + db];
            assert!(qr_objective(&ds, &b, 0.2) >= fit.objective - 1e-9);
        }
    }

    #[test]
    fn duplicate_heavy_resamples() {
        let mut rng = crate::rng::seeded(31);
        for trial in 0..40 {
            let base = random_instance(&mut rng, 12);
            let idx: Vec<usize> = (0..40).map(|_| rng.random_range(0..12)).collect();
            let ds = base.select(&idx);
            let model = fit_qr_cdf(&ds, &default_tau_grid());
            assert!(model.is_ok(), "trial {trial}: {:?}", model.err());
            for tau in [0.13, 0.5, 0.9] {
                let fit = fit_quantile_regression(&ds, tau).unwrap();
                assert!(fit.objective <= pair_basis_oracle(&ds, tau) + 1e-9);
            }
        }
    }

    #[test]
    fn many_points_on_one_line() {
        let mut rng = crate::rng::seeded(32);
        for _ in 0..20 {
            let x: Vec<f64> = (0..30).map(|_| rng.random_range(0.0..1.0)).collect();
            let y: Vec<f64> = x
                .iter()
                .enumerate()
                .map(|(i, &v)| if i % 3 == 0 { 1.0 + v + rng.random_range(-1.0..1.0) } else { 1.0 + v })
                .collect();
            let ds = Dataset::univariate(x, y).unwrap();
            for tau in [0.05, 0.3, 0.5, 0.95] {
                let fit = fit_quantile_regression(&ds, tau).unwrap();
                assert!(fit.objective <= pair_basis_oracle(&ds, tau) + 1e-7);
            }
        }
    }

    #[test]
    fn multivariate_fit() {
        let mut rng = crate::rng::seeded(4);
        let rows: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 1.0 + r[0] - 2.0 * r[1] + 0.1 * rng.random::<f64>()).collect();
        let ds = Dataset::from_rows(&rows, y).unwrap();
        let fit = fit_quantile_regression(&ds, 0.5).unwrap();
        assert_abs_diff_eq!(fit.beta[1], 1.0, epsilon = 0.1);
        assert_abs_diff_eq!(fit.beta[2], -2.0, epsilon = 0.1);
    }

    #[test]
    fn rejects_small_samples_and_bad_grids() {
        let ds = Dataset::univariate(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!(fit_quantile_regression(&ds, 0.5).is_err());
        let ds = Dataset::univariate(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
        assert!(fit_quantile_regression(&ds, 1.0).is_err());
        assert!(fit_qr_cdf(&ds, &[0.5, 0.2]).is_err());
        assert!(fit_qr_cdf(&ds, &[]).is_err());
    }

    #[test]
    fn identity_quantile_function() {
        // quantile(τ|x) = τ: intercept τ, slope 0.
        let taus = default_tau_grid();
        let model = QrCdfModel { betas: taus.iter().map(|&t| vec![t, 0.0]).collect(), taus, d: 1 };
        assert_abs_diff_eq!(model.cdf(0.37, &[0.3]).unwrap(), 0.37, epsilon = 0.01);
        assert_abs_diff_eq!(model.quantile(0.25, &[0.3]).unwrap(), 0.25, epsilon = 0.01);
        assert_eq!(model.cdf(f64::NEG_INFINITY, &[0.0]).unwrap(), 0.0);
        assert_eq!(model.cdf(f64::INFINITY, &[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn crossing_curves_are_rearranged() {
        let mut rng = crate::rng::seeded(13);
        let ds = random_instance(&mut rng, 30);
        let model = fit_qr_cdf(&ds, &default_tau_grid()).unwrap();
        for k in 0..50 {
            let x = -3.0 + 6.0 * k as f64 / 49.0;
            let q = model.quantile_curve(&[x]).unwrap();
            assert!(q.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
