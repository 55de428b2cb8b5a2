//! Continuous GCN approximated on a large reference sample, with
//! out-of-sample (Nyström) evaluation at arbitrary latent points.

mod operator;

use std::io::Write;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use ndarray::parallel::prelude::*;

pub use operator::{ReferenceOperator, ReferenceOptions, StorageKind, DEFAULT_MEMORY_BUDGET, DENSE_CAP};

use crate::error::{Error, Result};
use crate::gcn::{forward_trace, readout, GcnParams};
use crate::model::SignalFunction;

/// Output of the continuous GCN on a reference sample.
#[derive(Clone, Debug)]
pub struct CgcnSolution {
    /// `Φ_{W,P}(f)` at the reference points, `n_ref × d_out`.
    pub equivariant: Array2<f64>,
    /// `Φ̄_{W,P}(f)`: the reference-weighted mean of the equivariant output.
    pub invariant: Array1<f64>,
    /// `f^{(ℓ)}` at the reference points for `ℓ = 0..=M`.
    pub layers: Vec<Array2<f64>>,
    /// Per layer, `ω_j / √d_j · Σ_{k≥1} (𝓛^{k-1} f^{(ℓ)})(x_j) B_kᵀ`: what a
    /// query point needs from the reference sample.
    extension: Vec<Array2<f64>>,
}

/// Runs the network with the empirical operator in place of the graph
/// Laplacian and `f` sampled at the reference points.
pub fn cgcn_forward(params: &GcnParams, reference: &ReferenceOperator, f: &SignalFunction) -> Result<CgcnSolution> {
    if f.output_dimension != params.input_dim() {
        return Err(Error::shape(format!("signal of dimension {}", params.input_dim()), f.output_dimension));
    }
    let z0 = f.evaluate_rows(reference.latents());
    let trace = forward_trace(params, reference, z0.view())?;
    let equivariant = readout(params, trace.layers.last().unwrap().view());
    let invariant = reference.integrate(equivariant.view());
    let scale: Vec<f64> = reference.weights().iter().zip(reference.degrees()).map(|(w, d)| w / d.sqrt()).collect();
    let extension = trace
        .powers
        .iter()
        .enumerate()
        .map(|(l, powers)| {
            let mut g = Array2::zeros((reference.n_ref(), params.widths()[l + 1]));
            for k in 1..=params.order() {
                g += &powers[k - 1].dot(&params.filter(l, k).t());
            }
            for (mut row, s) in g.rows_mut().into_iter().zip(&scale) {
                row *= *s;
            }
            g
        })
        .collect();
    Ok(CgcnSolution { equivariant, invariant, layers: trace.layers, extension })
}

/// Evaluates the continuous GCN at `queries` by Nyström extension: at a
/// point `x`, `(𝓛^k g)(x) = Σ_j ω_j W(x, x_j) (𝓛^{k-1} g)(x_j) / √(d(x) d_j)`
/// with `d(x) = Σ_j ω_j W(x, x_j)`, while order-0 terms, biases and ρ act on
/// the query's own layer values. At a reference point this reproduces the
/// reference row.
pub fn evaluate_at(
    reference: &ReferenceOperator,
    params: &GcnParams,
    f: &SignalFunction,
    solution: &CgcnSolution,
    queries: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    let d = reference.latents().ncols();
    if queries.ncols() != d {
        return Err(Error::shape(format!("query points with {d} columns"), queries.ncols()));
    }
    if solution.extension.len() != params.layers() {
        return Err(Error::shape(format!("solution for {} layers", params.layers()), solution.extension.len()));
    }
    let floor = reference.kernel().c_min / 2.0;
    let rho = params.activation();
    let n_ref = reference.n_ref();
    let mut out = Array2::zeros((queries.nrows(), params.output_dim()));
    let results: Vec<Result<()>> = out
        .axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .map(|(q, mut row)| {
            let x = queries.row(q).to_vec();
            let mut w = vec![0.0; n_ref];
            let mut buf = vec![0.0; n_ref];
            for (j, wj) in w.iter_mut().enumerate() {
                *wj = reference.kernel().eval(&x, reference.latents().row(j).as_slice().unwrap());
                buf[j] = reference.weights()[j] * *wj;
            }
            let degree = crate::linalg::pairwise_sum(&buf);
            if !(degree >= floor && degree > 0.0) {
                return Err(Error::Extension { index: q, degree, floor });
            }
            let inv_sqrt = 1.0 / degree.sqrt();
            let mut z = Array1::from(f.eval_vec(&x));
            for l in 0..params.layers() {
                let g = &solution.extension[l];
                let mut next = params.filter(l, 0).dot(&z);
                for c in 0..next.len() {
                    for j in 0..n_ref {
                        buf[j] = w[j] * g[[j, c]];
                    }
                    next[c] += crate::linalg::pairwise_sum(&buf) * inv_sqrt;
                }
                next += &params.bias(l);
                next.mapv_inplace(|v| rho.apply(v));
                z = next;
            }
            let y = params.readout_weights().t().dot(&z) + params.readout_bias();
            row.assign(&y);
            Ok(())
        })
        .collect();
    for r in results {
        r?;
    }
    Ok(out)
}

/// Writes reference points and function values as CSV with header
/// `x0,…,v0,…`.
pub fn write_reference_csv<W: Write>(reference: &ReferenceOperator, values: ArrayView2<'_, f64>, mut w: W) -> Result<()> {
    if values.nrows() != reference.n_ref() {
        return Err(Error::shape(format!("{} value rows", reference.n_ref()), values.nrows()));
    }
    let d = reference.latents().ncols();
    let header: Vec<String> = (0..d).map(|k| format!("x{k}")).chain((0..values.ncols()).map(|k| format!("v{k}"))).collect();
    writeln!(w, "{}", header.join(","))?;
    for (x, v) in reference.latents().rows().into_iter().zip(values.rows()) {
        let fields: Vec<String> = x.iter().chain(v.iter()).map(|a| format!("{a:e}")).collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}
