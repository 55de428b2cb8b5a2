//! Comparison metrics between graph signals, point clouds and Laplacians.

mod assignment;
mod entropic;
mod transport;


use ndarray::parallel::prelude::*;
use ndarray::{Array2, ArrayView2, Axis};

pub use assignment::hungarian;
pub use entropic::{sinkhorn, Epsilon, SinkhornOptions, SinkhornResult};
pub use transport::uniform_transport_flow;

use crate::error::{Error, Result};
use crate::graph::{dense_normalized_laplacian, SampledGraph};
use crate::linalg::{pairwise_sum, power_iteration_norm, PowerIteration};
use crate::model::RandomGraphModel;

/// Largest `n` accepted by [`mse_sigma_exact`].
pub const EXACT_CAP: usize = 3000;
/// Largest `n · m` solved exactly by [`wasserstein2_empirical`] when `n ≠ m`.
pub const FLOW_CAP: usize = 250_000;
/// Largest graph for which [`laplacian_spectral_distance`] builds the dense
/// kernel matrix.
pub const DENSE_KERNEL_CAP: usize = 8000;

fn check_same_width(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<()> {
    if a.ncols() != b.ncols() {
        return Err(Error::shape(format!("{} columns", a.ncols()), format!("{} columns", b.ncols())));
    }
    Ok(())
}

/// Squared Euclidean distances `C[i][j] = ‖a_i − b_j‖²`, rows in parallel.
pub fn squared_distance_cost(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    check_same_width(a, b)?;
    let mut cost = Array2::zeros((a.nrows(), b.nrows()));
    cost.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
        let ai = a.row(i);
        for (j, c) in row.iter_mut().enumerate() {
            *c = ai.iter().zip(b.row(j)).map(|(x, y)| (x - y) * (x - y)).sum();
        }
    });
    Ok(cost)
}

/// Root mean squared row distance between node outputs and function values.
pub fn mse_x(z: ArrayView2<'_, f64>, f_values: ArrayView2<'_, f64>) -> Result<f64> {
    if z.dim() != f_values.dim() {
        return Err(Error::shape(format!("{:?}", z.dim()), format!("{:?}", f_values.dim())));
    }
    if z.nrows() == 0 {
        return Ok(0.0);
    }
    let sq: Vec<f64> = z
        .rows()
        .into_iter()
        .zip(f_values.rows())
        .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
        .collect();
    Ok((pairwise_sum(&sq) / z.nrows() as f64).sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MseSigma {
    pub value: f64,
    /// `permutation[i]` is the row of the second signal matched to row `i`
    /// of the first.
    pub permutation: Vec<usize>,
}

fn assignment_value(cost: ArrayView2<'_, f64>, assignment: &[usize]) -> f64 {
    let matched: Vec<f64> = assignment.iter().enumerate().map(|(i, &j)| cost[[i, j]]).collect();
    pairwise_sum(&matched)
}

/// Permutation-minimized root mean squared distance, solved exactly.
pub fn mse_sigma_exact(z1: ArrayView2<'_, f64>, z2: ArrayView2<'_, f64>) -> Result<MseSigma> {
    mse_sigma_exact_with_cap(z1, z2, EXACT_CAP)
}

pub fn mse_sigma_exact_with_cap(z1: ArrayView2<'_, f64>, z2: ArrayView2<'_, f64>, cap: usize) -> Result<MseSigma> {
    let n = z1.nrows();
    if z2.nrows() != n {
        return Err(Error::shape(format!("{n} rows in both signals"), z2.nrows()));
    }
    if n > cap {
        return Err(Error::TooLarge {
            what: "exact assignment".into(),
            size: n,
            cap,
            advice: "use the entropic estimate instead".into(),
        });
    }
    if n == 0 {
        return Ok(MseSigma { value: 0.0, permutation: Vec::new() });
    }
    let cost = squared_distance_cost(z1, z2)?;
    let permutation = hungarian(cost.view());
    let value = (assignment_value(cost.view(), &permutation) / n as f64).sqrt();
    Ok(MseSigma { value, permutation })
}

/// Entropic surrogate of [`mse_sigma_exact`]: the square root of the
/// Sinkhorn plan cost. It over-estimates the exact value and approaches it
/// as `ε → 0`; check `converged` on the result.
pub fn mse_sigma_entropic(z1: ArrayView2<'_, f64>, z2: ArrayView2<'_, f64>, opts: SinkhornOptions) -> Result<SinkhornResult> {
    if z2.nrows() != z1.nrows() {
        return Err(Error::shape(format!("{} rows in both signals", z1.nrows()), z2.nrows()));
    }
    let cost = squared_distance_cost(z1, z2)?;
    sinkhorn(cost.view(), opts)
}

impl SinkhornResult {
    /// `√cost`, on the same scale as the exact metrics.
    pub fn value(&self) -> f64 {
        self.cost.max(0.0).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransportSolver {
    Assignment,
    NetworkFlow,
    Entropic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wasserstein {
    pub value: f64,
    pub solver: TransportSolver,
}

/// `𝒲₂` between the uniform empirical measures on the rows of two clouds.
/// Equal sizes go through the assignment solver, unequal sizes through an
/// exact network flow up to [`FLOW_CAP`], and larger problems fall back to
/// the entropic estimate (reported in `solver`).
pub fn wasserstein2_empirical(p1: ArrayView2<'_, f64>, p2: ArrayView2<'_, f64>) -> Result<Wasserstein> {
    let (n, m) = (p1.nrows(), p2.nrows());
    if n == 0 || m == 0 {
        return Err(Error::shape("at least one point in each cloud", format!("{n} and {m}")));
    }
    check_same_width(p1, p2)?;
    if n == m && n <= EXACT_CAP {
        let value = mse_sigma_exact(p1, p2)?.value;
        return Ok(Wasserstein { value, solver: TransportSolver::Assignment });
    }
    let cost = squared_distance_cost(p1, p2)?;
    if n * m <= FLOW_CAP {
        let flow = uniform_transport_flow(cost.view());
        let terms: Vec<f64> = cost.iter().zip(&flow).map(|(c, &f)| c * f as f64).collect();
        let value = (pairwise_sum(&terms) / (n * m) as f64).sqrt();
        return Ok(Wasserstein { value, solver: TransportSolver::NetworkFlow });
    }
    let value = sinkhorn(cost.view(), SinkhornOptions::default())?.value();
    Ok(Wasserstein { value, solver: TransportSolver::Entropic })
}

/// Spectral norm of `L(A) − L(W(X))` for a sampled graph, with `W(X)` the
/// expected kernel matrix on the graph's own latents (zero diagonal, as the
/// graph has no self-loops). With `use_exact_kernel = false` the kernel is
/// multiplied by the graph's `α`, which the normalization cancels up to
/// rounding.
pub fn laplacian_spectral_distance(graph: &SampledGraph, model: &RandomGraphModel, use_exact_kernel: bool) -> Result<f64> {
    laplacian_spectral_distance_with(graph, model, use_exact_kernel, PowerIteration { restarts: 3, ..Default::default() })
}

pub fn laplacian_spectral_distance_with(
    graph: &SampledGraph,
    model: &RandomGraphModel,
    use_exact_kernel: bool,
    opts: PowerIteration,
) -> Result<f64> {
    let n = graph.n();
    if n > DENSE_KERNEL_CAP {
        return Err(Error::TooLarge {
            what: "dense kernel matrix".into(),
            size: n,
            cap: DENSE_KERNEL_CAP,
            advice: "subsample the graph".into(),
        });
    }
    let x = &graph.latents;
    if x.nrows() != n || x.ncols() != model.dimension() {
        return Err(Error::shape(format!("{n} × {} latents", model.dimension()), format!("{:?}", x.dim())));
    }
    let scale = if use_exact_kernel { 1.0 } else { graph.alpha };
    let mut w = Array2::zeros((n, n));
    w.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
        let xi = x.row(i);
        let xi = xi.as_slice().expect("latents are row-major");
        for j in 0..n {
            if j != i {
                row[j] = scale * model.kernel.eval(xi, x.row(j).as_slice().expect("latents are row-major"));
            }
        }
    });
    let lw = dense_normalized_laplacian(w.view());
    drop(w);
    let la = graph.laplacian();
    let mut scratch = vec![0.0; n];
    let norm = power_iteration_norm(n, opts, |v, out| {
        la.matvec(v, &mut scratch).expect("sizes match");
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let row = lw.row(i);
            let dense: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
            *o = scratch[i] - dense;
        });
    });
    Ok(norm)
}
