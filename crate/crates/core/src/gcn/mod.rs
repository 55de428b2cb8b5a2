//! Discrete GCN forward passes with polynomial spectral filters.

mod format;
mod params;

use ndarray::{Array1, Array2, ArrayView2, ArrayView3, ArrayViewMut2, Axis};
use rand_distr::{Distribution, StandardNormal};

pub use format::{params_from_text, params_to_text, FORMAT_HEADER};
pub use params::{Activation, GcnParams, ScalePolicy};

use crate::error::{Error, Result};
use crate::graph::NormalizedLaplacian;
use crate::rng::{rng_for, stream};

/// A symmetric linear operator on node signals: the graph Laplacian or its
/// continuous counterpart on a reference sample.
pub trait SignalOperator: Sync {
    fn size(&self) -> usize;
    /// `out = Op · v` for an `size × k` matrix `v`.
    fn apply_into(&self, v: ArrayView2<'_, f64>, out: ArrayViewMut2<'_, f64>);
}

impl SignalOperator for NormalizedLaplacian {
    fn size(&self) -> usize {
        self.n()
    }
    fn apply_into(&self, v: ArrayView2<'_, f64>, out: ArrayViewMut2<'_, f64>) {
        NormalizedLaplacian::apply_into(self, v, out)
    }
}

/// `[Z, Op Z, …, Op^K Z]`, computed with exactly K operator applications.
pub fn filter_powers(op: &dyn SignalOperator, z: ArrayView2<'_, f64>, order: usize) -> Result<Vec<Array2<f64>>> {
    if z.nrows() != op.size() {
        return Err(Error::shape(format!("signal with {} rows", op.size()), z.nrows()));
    }
    let mut powers = Vec::with_capacity(order + 1);
    powers.push(z.to_owned());
    for k in 1..=order {
        let mut next = Array2::zeros(z.raw_dim());
        op.apply_into(powers[k - 1].view(), next.view_mut());
        powers.push(next);
    }
    Ok(powers)
}

/// `Σ_k V_k B_kᵀ` for powers `V_k = Op^k Z` and coefficients of shape
/// `(K + 1, d_out, d_in)`.
pub fn combine_powers(coefficients: ArrayView3<'_, f64>, powers: &[Array2<f64>]) -> Array2<f64> {
    let (_, d_out, _) = coefficients.dim();
    let mut out = Array2::zeros((powers[0].nrows(), d_out));
    for (k, v) in powers.iter().enumerate() {
        out += &v.dot(&coefficients.index_axis(Axis(0), k).t());
    }
    out
}

/// `Σ_k Op^k Z B_kᵀ` by iterated application; `Op^k` is never formed.
pub fn apply_filter(coefficients: ArrayView3<'_, f64>, op: &dyn SignalOperator, z: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let (k1, _, d_in) = coefficients.dim();
    if z.ncols() != d_in || k1 == 0 {
        return Err(Error::shape(format!("signal with {d_in} columns"), z.ncols()));
    }
    let powers = filter_powers(op, z, k1 - 1)?;
    Ok(combine_powers(coefficients, &powers))
}

/// Hidden representations `Z^{(0)}, …, Z^{(M)}` together with the operator
/// powers `Op^k Z^{(ℓ)}` used at every layer.
#[derive(Clone, Debug)]
pub struct ForwardTrace {
    pub layers: Vec<Array2<f64>>,
    /// `powers[ℓ][k] = Op^k Z^{(ℓ)}` for `k = 0..=K`.
    pub powers: Vec<Vec<Array2<f64>>>,
}

/// Runs the hidden layers `z^{ℓ+1} = ρ(Σ_k Op^k z^ℓ B_kᵀ + 1 bᵀ)`.
pub fn forward_trace(params: &GcnParams, op: &dyn SignalOperator, z: ArrayView2<'_, f64>) -> Result<ForwardTrace> {
    if z.ncols() != params.input_dim() {
        return Err(Error::shape(format!("input with {} columns", params.input_dim()), z.ncols()));
    }
    if z.nrows() != op.size() {
        return Err(Error::shape(format!("input with {} rows", op.size()), z.nrows()));
    }
    let rho = params.activation();
    let mut layers = vec![z.to_owned()];
    let mut powers = Vec::with_capacity(params.layers());
    for l in 0..params.layers() {
        let p = filter_powers(op, layers[l].view(), params.order())?;
        let mut next = combine_powers(params.coefficients(l), &p);
        let b = params.bias(l);
        for mut row in next.rows_mut() {
            for (v, bj) in row.iter_mut().zip(b.iter()) {
                *v = rho.apply(*v + bj);
            }
        }
        powers.push(p);
        layers.push(next);
    }
    Ok(ForwardTrace { layers, powers })
}

/// `Z θ + 1 bᵀ`.
pub fn readout(params: &GcnParams, z: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = z.dot(&params.readout_weights());
    out += &params.readout_bias();
    out
}

/// Equivariant output: one row per node.
pub fn forward_equivariant(params: &GcnParams, op: &dyn SignalOperator, z: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let trace = forward_trace(params, op, z)?;
    Ok(readout(params, trace.layers.last().unwrap().view()))
}

/// Invariant output: mean over nodes of the equivariant output.
pub fn forward_invariant(params: &GcnParams, op: &dyn SignalOperator, z: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    Ok(row_mean(forward_equivariant(params, op, z)?.view()))
}

/// Column means, accumulated as a running mean so that constant columns
/// are returned exactly.
pub fn row_mean(m: ArrayView2<'_, f64>) -> Array1<f64> {
    let mut mean = Array1::zeros(m.ncols());
    for (k, row) in m.rows().into_iter().enumerate() {
        let w = 1.0 / (k + 1) as f64;
        for (acc, v) in mean.iter_mut().zip(row) {
            *acc += (v - *acc) * w;
        }
    }
    mean
}

/// The input `Z + ν` with i.i.d. `N(0, noise_std²)` entries, optionally
/// smoothed to `L (Z + ν)`; row `i` of the noise depends only on `(seed, i)`.
pub fn noisy_input(lap: &NormalizedLaplacian, clean: ArrayView2<'_, f64>, noise_std: f64, presmooth: bool, seed: u64) -> Result<Array2<f64>> {
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(Error::config("noise_std", "must be finite and nonnegative"));
    }
    let mut z = clean.to_owned();
    if noise_std > 0.0 {
        for (i, mut row) in z.rows_mut().into_iter().enumerate() {
            let mut rng = rng_for(seed, stream::NOISE, i as u64);
            for v in row.iter_mut() {
                let e: f64 = StandardNormal.sample(&mut rng);
                *v += noise_std * e;
            }
        }
    }
    if presmooth {
        z = lap.apply(z.view())?;
    }
    Ok(z)
}

/// Equivariant output on a noisy (optionally pre-smoothed) input.
pub fn forward_with_noise(
    params: &GcnParams,
    lap: &NormalizedLaplacian,
    clean: ArrayView2<'_, f64>,
    noise_std: f64,
    presmooth: bool,
    seed: u64,
) -> Result<Array2<f64>> {
    let z = noisy_input(lap, clean, noise_std, presmooth, seed)?;
    forward_equivariant(params, lap, z.view())
}

#[cfg(test)]
mod tests;
