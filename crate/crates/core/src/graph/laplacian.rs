use ndarray::{Array2, ArrayView2, ArrayViewMut2};
use ndarray::parallel::prelude::*;

use super::SampledGraph;
use crate::error::{Error, Result};
use crate::linalg::{power_iteration_norm, PowerIteration};

/// Largest graph for which a dense copy of `L` is kept alongside the sparse one.
pub const DENSE_MIRROR_CAP: usize = 512;

/// `L = D^{-1/2} A D^{-1/2}` in CSR form, with rows and columns of
/// zero-degree nodes left empty.
#[derive(Clone, Debug)]
pub struct NormalizedLaplacian {
    n: usize,
    offsets: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
    degrees: Vec<f64>,
    zero_degree: Vec<bool>,
    dense: Option<Array2<f64>>,
}

impl NormalizedLaplacian {
    pub fn new(graph: &SampledGraph) -> Self {
        let n = graph.n();
        let degrees: Vec<f64> = (0..n).map(|i| graph.degree(i) as f64).collect();
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let mut indices = Vec::with_capacity(2 * graph.edge_count());
        let mut values = Vec::with_capacity(2 * graph.edge_count());
        for i in 0..n {
            for &j in graph.neighbors(i) {
                indices.push(j);
                values.push(1.0 / (degrees[i] * degrees[j as usize]).sqrt());
            }
            offsets.push(indices.len());
        }
        let zero_degree = degrees.iter().map(|&d| d == 0.0).collect();
        let mut l = Self { n, offsets, indices, values, degrees, zero_degree, dense: None };
        if n <= DENSE_MIRROR_CAP {
            l.dense = Some(l.to_dense());
        }
        l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `A 1`.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn zero_degree_mask(&self) -> &[bool] {
        &self.zero_degree
    }

    pub fn isolated_count(&self) -> usize {
        self.zero_degree.iter().filter(|&&z| z).count()
    }

    /// Dense copy, kept only for graphs with at most [`DENSE_MIRROR_CAP`] nodes.
    pub fn dense_mirror(&self) -> Option<&Array2<f64>> {
        self.dense.as_ref()
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for k in self.offsets[i]..self.offsets[i + 1] {
                m[[i, self.indices[k] as usize]] = self.values[k];
            }
        }
        m
    }

    /// `out = L v`.
    pub fn matvec(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        if v.len() != self.n || out.len() != self.n {
            return Err(Error::shape(format!("vectors of length {}", self.n), format!("{} and {}", v.len(), out.len())));
        }
        self.matvec_unchecked(v, out);
        Ok(())
    }

    fn matvec_unchecked(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.offsets[i]..self.offsets[i + 1] {
                acc += self.values[k] * v[self.indices[k] as usize];
            }
            *o = acc;
        }
    }

    /// `L V` for an `n × k` matrix.
    pub fn apply(&self, v: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if v.nrows() != self.n {
            return Err(Error::shape(format!("{} rows", self.n), v.nrows()));
        }
        let mut out = Array2::zeros(v.raw_dim());
        self.apply_into(v, out.view_mut());
        Ok(out)
    }

    /// `out = L V` without shape checks beyond debug assertions; rows are
    /// computed in parallel, each summed in neighbour order.
    pub fn apply_into(&self, v: ArrayView2<'_, f64>, mut out: ArrayViewMut2<'_, f64>) {
        debug_assert_eq!(v.nrows(), self.n);
        debug_assert_eq!(out.dim(), v.dim());
        let k = v.ncols();
        out.axis_iter_mut(ndarray::Axis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
            row.fill(0.0);
            for p in self.offsets[i]..self.offsets[i + 1] {
                let w = self.values[p];
                let src = v.row(self.indices[p] as usize);
                for c in 0..k {
                    row[c] += w * src[c];
                }
            }
        });
    }

    /// Power-iteration estimate of `‖L‖₂`, at most 1 by construction.
    pub fn spectral_radius(&self, opts: PowerIteration) -> f64 {
        power_iteration_norm(self.n, opts, |v, out| self.matvec_unchecked(v, out))
    }
}

/// Normalized Laplacian `D^{-1/2} W D^{-1/2}` of a dense symmetric weight
/// matrix, with the same zero-degree convention.
pub fn dense_normalized_laplacian(w: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = w.nrows();
    let inv_sqrt: Vec<f64> = w
        .rows()
        .into_iter()
        .map(|r| {
            let d: f64 = r.sum();
            if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }
        })
        .collect();
    Array2::from_shape_fn((n, n), |(i, j)| w[[i, j]] * inv_sqrt[i] * inv_sqrt[j])
}
