use ndarray::{Array2, ArrayView2, ArrayViewMut2, Axis};
use ndarray::parallel::prelude::*;

use crate::error::{Error, Result};
use crate::gcn::SignalOperator;
use crate::linalg::pairwise_sum;
use crate::model::{Kernel, NodeDistribution, RandomGraphModel};

/// Largest reference sample stored as a dense matrix.
pub const DENSE_CAP: usize = 8192;
/// Default memory budget for sparse storage of larger samples.
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceOptions {
    pub dense_cap: usize,
    /// Bytes allowed for a sparse copy of the kernel matrix; above it rows
    /// are recomputed at every application.
    pub memory_budget: usize,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        Self { dense_cap: DENSE_CAP, memory_budget: DEFAULT_MEMORY_BUDGET }
    }
}

#[derive(Clone, Debug)]
enum Storage {
    /// Row-major operator matrix `ω_j W_ij / √(d_i d_j)`.
    Dense(Array2<f64>),
    /// Nonzero pattern of a `{0, 1}`-valued kernel.
    Pattern { offsets: Vec<usize>, indices: Vec<u32> },
    /// Nonzero kernel values.
    Sparse { offsets: Vec<usize>, indices: Vec<u32>, values: Vec<f64> },
    Streaming,
}

/// How the kernel matrix of a [`ReferenceOperator`] is held.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StorageKind {
    Dense,
    Pattern,
    Sparse,
    Streaming,
}

/// Empirical normalized Laplacian operator on a reference sample,
/// `(𝓛 v)_i = Σ_j ω_j W(x_i, x_j) v_j / √(d_i d_j)` with
/// `d_i = Σ_j ω_j W(x_i, x_j)` (the `j = i` term included). Monte-Carlo
/// references use `ω_j = 1/n`; the quadrature backend uses trapezoid weights.
#[derive(Clone, Debug)]
pub struct ReferenceOperator {
    latents: Array2<f64>,
    kernel: Kernel,
    weights: Vec<f64>,
    degrees: Vec<f64>,
    storage: Storage,
}

impl ReferenceOperator {
    /// Monte-Carlo reference of `n_ref` points drawn from the model's
    /// distribution with the exact kernel (no edge noise, `α = 1`).
    pub fn build(model: &RandomGraphModel, n_ref: usize, seed: u64) -> Result<Self> {
        Self::build_with(model, n_ref, seed, ReferenceOptions::default())
    }

    pub fn build_with(model: &RandomGraphModel, n_ref: usize, seed: u64, opts: ReferenceOptions) -> Result<Self> {
        if n_ref == 0 {
            return Err(Error::config("n_ref", "need at least one reference point"));
        }
        let latents = model.sample_latents(n_ref, seed)?;
        let weights = vec![1.0 / n_ref as f64; n_ref];
        Self::from_points(&model.kernel, latents, weights, opts)
    }

    /// Trapezoid-rule reference for one-dimensional uniform models on
    /// `grid_size` equally spaced nodes.
    pub fn quadrature(model: &RandomGraphModel, grid_size: usize) -> Result<Self> {
        let (lo, hi) = match &model.distribution {
            NodeDistribution::UniformCube { lo, hi } if lo.len() == 1 => (lo[0], hi[0]),
            _ => return Err(Error::config("reference.backend", "quadrature needs a one-dimensional uniform distribution")),
        };
        if grid_size < 2 {
            return Err(Error::config("reference.grid_size", "need at least two nodes"));
        }
        let h = (hi - lo) / (grid_size - 1) as f64;
        let latents = Array2::from_shape_fn((grid_size, 1), |(j, _)| lo + h * j as f64);
        let weights: Vec<f64> = (0..grid_size)
            .map(|j| if j == 0 || j == grid_size - 1 { 0.5 * h } else { h } / (hi - lo))
            .collect();
        Self::from_points(&model.kernel, latents, weights, ReferenceOptions::default())
    }

    /// Reference for a finite-mixture distribution with community sizes
    /// proportional to the weights (largest-remainder rounding), so that
    /// block degrees are exact when `n_ref` allows it.
    pub fn stratified(model: &RandomGraphModel, n_ref: usize) -> Result<Self> {
        let (weights, centers) = match &model.distribution {
            NodeDistribution::FiniteMixture { weights, centers } => (weights, centers),
            _ => return Err(Error::config("reference.backend", "stratified references need a finite mixture")),
        };
        if n_ref == 0 {
            return Err(Error::config("n_ref", "need at least one reference point"));
        }
        let ideal: Vec<f64> = weights.iter().map(|w| w * n_ref as f64).collect();
        let mut counts: Vec<usize> = ideal.iter().map(|v| v.floor() as usize).collect();
        let mut order: Vec<usize> = (0..counts.len()).collect();
        order.sort_by(|&a, &b| (ideal[b] - counts[b] as f64).total_cmp(&(ideal[a] - counts[a] as f64)));
        let missing = n_ref - counts.iter().sum::<usize>();
        for &k in order.iter().take(missing) {
            counts[k] += 1;
        }
        let d = centers[0].len();
        let mut latents = Array2::zeros((n_ref, d));
        let mut row = 0;
        for (k, &c) in counts.iter().enumerate() {
            for _ in 0..c {
                latents.row_mut(row).assign(&ndarray::ArrayView1::from(&centers[k][..]));
                row += 1;
            }
        }
        Self::from_points(&model.kernel, latents, vec![1.0 / n_ref as f64; n_ref], ReferenceOptions::default())
    }

    /// Reference operator on given points and quadrature weights summing to 1.
    pub fn from_points(kernel: &Kernel, latents: Array2<f64>, weights: Vec<f64>, opts: ReferenceOptions) -> Result<Self> {
        let n = latents.nrows();
        if weights.len() != n {
            return Err(Error::shape(format!("{n} weights"), weights.len()));
        }
        let rows: Vec<&[f64]> = latents.rows().into_iter().map(|r| r.to_slice().expect("row-major")).collect();
        // with equal weights the sum is divided by n afterwards, so constant
        // kernels give exactly constant degrees
        let uniform = weights.iter().all(|&w| w == weights[0]);
        // degrees and nonzero counts, each row summed in index order
        let stats: Vec<(f64, usize)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut buf = Vec::with_capacity(n);
                let mut nnz = 0;
                for j in 0..n {
                    let w = kernel.eval(rows[i], rows[j]);
                    nnz += (w != 0.0) as usize;
                    buf.push(if uniform { w } else { weights[j] * w });
                }
                let sum = pairwise_sum(&buf);
                (if uniform { sum / n as f64 } else { sum }, nnz)
            })
            .collect();
        let degrees: Vec<f64> = stats.iter().map(|s| s.0).collect();
        let floor = kernel.c_min / 2.0;
        if let Some((index, &degree)) =
            degrees.iter().enumerate().filter(|(_, &d)| d < floor).min_by(|a, b| a.1.total_cmp(b.1))
        {
            return Err(Error::SamplingFailure { index, degree, floor });
        }
        if let Some(index) = degrees.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::SamplingFailure { index, degree: degrees[index], floor });
        }
        let nnz: usize = stats.iter().map(|s| s.1).sum();
        let storage = if n <= opts.dense_cap {
            let mut m = Array2::zeros((n, n));
            m.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
                for j in 0..n {
                    row[j] = weights[j] * kernel.eval(rows[i], rows[j]) / (degrees[i] * degrees[j]).sqrt();
                }
            });
            Storage::Dense(m)
        } else if kernel.is_binary() && nnz * 4 + n * 8 <= opts.memory_budget {
            let (offsets, indices, _) = sparse_rows(kernel, &rows, false);
            Storage::Pattern { offsets, indices }
        } else if nnz * 12 + n * 8 <= opts.memory_budget {
            let (offsets, indices, values) = sparse_rows(kernel, &rows, true);
            Storage::Sparse { offsets, indices, values }
        } else {
            Storage::Streaming
        };
        Ok(Self { latents, kernel: kernel.clone(), weights, degrees, storage })
    }

    pub fn n_ref(&self) -> usize {
        self.latents.nrows()
    }

    pub fn latents(&self) -> ArrayView2<'_, f64> {
        self.latents.view()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Empirical degrees `d_{W,X}(x_i)`.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn storage(&self) -> StorageKind {
        match self.storage {
            Storage::Dense(_) => StorageKind::Dense,
            Storage::Pattern { .. } => StorageKind::Pattern,
            Storage::Sparse { .. } => StorageKind::Sparse,
            Storage::Streaming => StorageKind::Streaming,
        }
    }

    /// `Σ_j ω_j v_j` per column, summed pairwise in index order.
    pub fn integrate(&self, v: ArrayView2<'_, f64>) -> ndarray::Array1<f64> {
        let mut buf = vec![0.0; self.n_ref()];
        ndarray::Array1::from_shape_fn(v.ncols(), |c| {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = self.weights[j] * v[[j, c]];
            }
            pairwise_sum(&buf)
        })
    }

    /// Row `i` of the operator applied to `v`, written into `out`.
    fn apply_row(&self, i: usize, v: ArrayView2<'_, f64>, out: &mut [f64], buf: &mut Vec<f64>) {
        let k = v.ncols();
        let di = self.degrees[i];
        let entry = |j: usize, w: f64| self.weights[j] * w / (di * self.degrees[j]).sqrt();
        for c in 0..k {
            buf.clear();
            match &self.storage {
                Storage::Dense(m) => {
                    let row = m.row(i);
                    buf.extend(row.iter().enumerate().map(|(j, a)| a * v[[j, c]]));
                }
                Storage::Pattern { offsets, indices } => {
                    buf.extend(indices[offsets[i]..offsets[i + 1]].iter().map(|&j| entry(j as usize, 1.0) * v[[j as usize, c]]));
                }
                Storage::Sparse { offsets, indices, values } => {
                    buf.extend(
                        (offsets[i]..offsets[i + 1])
                            .map(|p| entry(indices[p] as usize, values[p]) * v[[indices[p] as usize, c]]),
                    );
                }
                Storage::Streaming => {
                    let xi = self.latents.row(i);
                    let xi = xi.as_slice().unwrap();
                    buf.extend((0..self.n_ref()).map(|j| {
                        let w = self.kernel.eval(xi, self.latents.row(j).as_slice().unwrap());
                        entry(j, w) * v[[j, c]]
                    }));
                }
            }
            out[c] = pairwise_sum(buf);
        }
    }
}

fn sparse_rows(kernel: &Kernel, rows: &[&[f64]], keep_values: bool) -> (Vec<usize>, Vec<u32>, Vec<f64>) {
    let n = rows.len();
    let per_row: Vec<(Vec<u32>, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut idx = Vec::new();
            let mut val = Vec::new();
            for j in 0..n {
                let w = kernel.eval(rows[i], rows[j]);
                if w != 0.0 {
                    idx.push(j as u32);
                    if keep_values {
                        val.push(w);
                    }
                }
            }
            (idx, val)
        })
        .collect();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let total: usize = per_row.iter().map(|r| r.0.len()).sum();
    let mut indices = Vec::with_capacity(total);
    let mut values = Vec::with_capacity(if keep_values { total } else { 0 });
    for (idx, val) in per_row {
        indices.extend(idx);
        values.extend(val);
        offsets.push(indices.len());
    }
    (offsets, indices, values)
}

impl SignalOperator for ReferenceOperator {
    fn size(&self) -> usize {
        self.n_ref()
    }

    fn apply_into(&self, v: ArrayView2<'_, f64>, mut out: ArrayViewMut2<'_, f64>) {
        let k = v.ncols();
        out.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each_init(
            || (Vec::new(), vec![0.0; k]),
            |(buf, tmp), (i, mut row)| {
                self.apply_row(i, v, tmp, buf);
                for c in 0..k {
                    row[c] = tmp[c];
                }
            },
        );
    }
}
