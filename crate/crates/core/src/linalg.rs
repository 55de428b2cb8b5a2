//! Small dense helpers and the power-iteration spectral norm estimator.

use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};

use crate::rng::{stream, unit_uniform};

pub(crate) fn to_nalgebra(m: ArrayView2<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

/// Largest singular value of a small dense matrix.
pub fn spectral_norm(m: ArrayView2<'_, f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let svd = to_nalgebra(m).svd(false, false);
    svd.singular_values.iter().cloned().fold(0.0, f64::max)
}

/// Spectral norm of the entrywise absolute value of `m`.
pub fn abs_spectral_norm(m: ArrayView2<'_, f64>) -> f64 {
    spectral_norm(m.mapv(f64::abs).view())
}

/// Eigenvalues and eigenvectors (as columns) of a dense symmetric matrix,
/// eigenvalues in ascending order.
pub fn symmetric_eigen(m: ArrayView2<'_, f64>) -> (Vec<f64>, Array2<f64>) {
    let n = m.nrows();
    let eig = to_nalgebra(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Pairwise (cascade) summation in index-ascending order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        s
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// Options for [`power_iteration_norm`].
#[derive(Clone, Copy, Debug)]
pub struct PowerIteration {
    pub max_iter: usize,
    pub rel_tol: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self { max_iter: 300, rel_tol: 1e-10, restarts: 1, seed: 0x5eed }
    }
}

/// Estimates the spectral norm of a symmetric linear operator of size `n`
/// given as `apply(input, output)`. The estimate is `‖A v‖` for the final
/// normalized iterate, maximized over `restarts` fixed-seed start vectors.
pub fn power_iteration_norm<F>(n: usize, opts: PowerIteration, mut apply: F) -> f64
where
    F: FnMut(&[f64], &mut [f64]),
{
    if n == 0 {
        return 0.0;
    }
    let mut best: f64 = 0.0;
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    for restart in 0..opts.restarts.max(1) {
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = unit_uniform(opts.seed, stream::POWER, restart as u64, i as u64) - 0.5;
        }
        normalize(&mut v);
        let mut estimate = 0.0;
        for _ in 0..opts.max_iter {
            apply(&v, &mut w);
            let norm = norm2(&w);
            if norm == 0.0 {
                estimate = 0.0;
                break;
            }
            let previous = estimate;
            estimate = norm;
            for (vi, wi) in v.iter_mut().zip(&w) {
                *vi = wi / norm;
            }
            if previous > 0.0 && ((estimate - previous) / estimate).abs() < opts.rel_tol {
                break;
            }
        }
        best = best.max(estimate);
    }
    best
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = norm2(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}
