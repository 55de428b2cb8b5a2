//! Log-domain Sinkhorn iterations for entropic optimal transport.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::pairwise_sum;

/// Regularization strength, either absolute or relative to the median
/// entry of the cost matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Epsilon {
    Absolute(f64),
    MedianScaled(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct SinkhornOptions {
    pub epsilon: Epsilon,
    pub max_iter: usize,
    /// Stop once the L¹ violation of the row marginals is below this.
    pub tol: f64,
}

impl Default for SinkhornOptions {
    fn default() -> Self {
        Self { epsilon: Epsilon::MedianScaled(1e-2), max_iter: 10_000, tol: 1e-9 }
    }
}

impl SinkhornOptions {
    pub fn absolute(epsilon: f64) -> Self {
        Self { epsilon: Epsilon::Absolute(epsilon), ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinkhornResult {
    /// `⟨P, C⟩` for the entropic plan rounded onto the exact couplings, hence
    /// never below the optimal cost. At convergence it exceeds the optimum
    /// by at most `ε log n` (for `n = m`).
    pub cost: f64,
    pub epsilon: f64,
    pub iterations: usize,
    pub marginal_error: f64,
    /// False when `max_iter` was reached; the best iterate is still returned.
    pub converged: bool,
}

fn median(cost: ArrayView2<'_, f64>) -> f64 {
    let mut all: Vec<f64> = cost.iter().copied().collect();
    let mid = all.len() / 2;
    let (_, m, _) = all.select_nth_unstable_by(mid, f64::total_cmp);
    *m
}

fn log_sum_exp(it: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + it.map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Entropic transport between uniform measures on the rows and columns of
/// `cost`.
pub fn sinkhorn(cost: ArrayView2<'_, f64>, opts: SinkhornOptions) -> Result<SinkhornResult> {
    let (n, m) = cost.dim();
    if n == 0 || m == 0 {
        return Err(Error::shape("non-empty cost matrix", format!("{n} × {m}")));
    }
    let eps = match opts.epsilon {
        Epsilon::Absolute(e) => e,
        Epsilon::MedianScaled(s) => {
            // mostly coincident clouds have a zero median; fall back to the mean
            let med = median(cost);
            let scale = if med > 0.0 { med } else { cost.mean().unwrap_or(0.0) };
            if scale == 0.0 && s > 0.0 {
                return Ok(SinkhornResult { cost: 0.0, epsilon: 0.0, iterations: 0, marginal_error: 0.0, converged: true });
            }
            s * scale
        }
    };
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::config("epsilon", format!("must be positive, got {eps}")));
    }
    let log_a = -(n as f64).ln();
    let log_b = -(m as f64).ln();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; m];
    let mut iterations = 0;
    let mut marginal_error = f64::INFINITY;
    while iterations < opts.max_iter {
        iterations += 1;
        for (i, fi) in f.iter_mut().enumerate() {
            let row = cost.row(i);
            *fi = eps * log_a - eps * log_sum_exp((0..m).map(|j| (g[j] - row[j]) / eps));
        }
        for (j, gj) in g.iter_mut().enumerate() {
            let col = cost.column(j);
            *gj = eps * log_b - eps * log_sum_exp((0..n).map(|i| (f[i] - col[i]) / eps));
        }
        // columns are exact after the g update; measure the rows
        marginal_error = (0..n)
            .map(|i| {
                let row = cost.row(i);
                let mass: f64 = (0..m).map(|j| ((f[i] + g[j] - row[j]) / eps).exp()).sum();
                (mass - 1.0 / n as f64).abs()
            })
            .sum();
        if marginal_error < opts.tol {
            break;
        }
    }
    let plan = rounded_plan(cost, &f, &g, eps);
    let terms: Vec<f64> = plan.iter().zip(cost.iter()).map(|(p, c)| p * c).collect();
    let total = pairwise_sum(&terms);
    Ok(SinkhornResult { cost: total, epsilon: eps, iterations, marginal_error, converged: marginal_error < opts.tol })
}

/// Projects the Sinkhorn plan onto the exact coupling polytope: rows and
/// columns are scaled down to their targets, then the missing mass is
/// spread as a rank-one correction. The result is a coupling, so its cost is
/// never below the optimum even when the iterations have not converged.
fn rounded_plan(cost: ArrayView2<'_, f64>, f: &[f64], g: &[f64], eps: f64) -> Array2<f64> {
    let (n, m) = cost.dim();
    let (a, b) = (1.0 / n as f64, 1.0 / m as f64);
    let mut plan = Array2::from_shape_fn((n, m), |(i, j)| ((f[i] + g[j] - cost[[i, j]]) / eps).exp());
    for mut row in plan.rows_mut() {
        let s = row.sum();
        if s > a {
            row *= a / s;
        }
    }
    for mut col in plan.columns_mut() {
        let s = col.sum();
        if s > b {
            col *= b / s;
        }
    }
    let row_gap: Vec<f64> = plan.rows().into_iter().map(|r| (a - r.sum()).max(0.0)).collect();
    let col_gap: Vec<f64> = plan.columns().into_iter().map(|c| (b - c.sum()).max(0.0)).collect();
    let missing: f64 = row_gap.iter().sum();
    if missing > 0.0 {
        for i in 0..n {
            for j in 0..m {
                plan[[i, j]] += row_gap[i] * col_gap[j] / missing;
            }
        }
    }
    plan
}
