//! Finite random graphs drawn from a latent-space model and their
//! normalized Laplacians.

mod io;
mod laplacian;

use ndarray::{Array1, Array2, ArrayView2};
use rayon::prelude::*;

pub use io::{read_edge_list, write_edge_list};
pub use laplacian::{dense_normalized_laplacian, NormalizedLaplacian, DENSE_MIRROR_CAP};

use crate::error::{Error, Result};
use crate::model::{Kernel, RandomGraphModel};
use crate::rng::{derive_seed, stream, unit_uniform};

/// Slack allowed on `α W ≤ 1` before the model is rejected.
const PROBABILITY_SLACK: f64 = 1e-12;

/// One draw from a random graph model: an undirected simple graph with its
/// latent positions and node signals.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledGraph {
    n: usize,
    /// Edges `(i, j)` with `i < j`, sorted.
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
    pub latents: Array2<f64>,
    pub signals: Array2<f64>,
    pub alpha: f64,
    pub latent_seed: u64,
    pub edge_seed: u64,
}

impl SampledGraph {
    /// Builds a graph from an edge list. Duplicate and reversed pairs are
    /// merged; self-loops and out-of-range endpoints are rejected. Latents and
    /// signals may have zero columns.
    pub fn from_edges(
        n: usize,
        edges: &[(usize, usize)],
        latents: Array2<f64>,
        signals: Array2<f64>,
        alpha: f64,
    ) -> Result<Self> {
        if latents.nrows() != n || signals.nrows() != n {
            return Err(Error::shape(format!("{n} rows of latents and signals"), format!("{} and {}", latents.nrows(), signals.nrows())));
        }
        let mut pairs = Vec::with_capacity(edges.len());
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::shape(format!("node index below {n}"), i.max(j)));
            }
            if i == j {
                return Err(Error::Model(format!("self-loop at node {i}")));
            }
            pairs.push((i.min(j) as u32, i.max(j) as u32));
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self::assemble(n, pairs, latents, signals, alpha, 0, 0))
    }

    /// Graph with no latents and no signals, for structural tests.
    pub fn structural(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::from_edges(n, edges, Array2::zeros((n, 0)), Array2::zeros((n, 0)), 1.0)
    }

    fn assemble(
        n: usize,
        edges: Vec<(u32, u32)>,
        latents: Array2<f64>,
        signals: Array2<f64>,
        alpha: f64,
        latent_seed: u64,
        edge_seed: u64,
    ) -> Self {
        let mut degree = vec![0usize; n];
        for &(i, j) in &edges {
            degree[i as usize] += 1;
            degree[j as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n]];
        // edges are sorted by (i, j): the first pass appends smaller
        // neighbours in increasing order, the second the larger ones
        for &(i, j) in &edges {
            neighbors[fill[j as usize]] = i;
            fill[j as usize] += 1;
        }
        for &(i, j) in &edges {
            neighbors[fill[i as usize]] = j;
            fill[i as usize] += 1;
        }
        debug_assert!((0..n).all(|i| neighbors[offsets[i]..offsets[i + 1]].windows(2).all(|w| w[0] < w[1])));
        Self { n, edges, offsets, neighbors, latents, signals, alpha, latent_seed, edge_seed }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges `(i, j)` with `i < j` in lexicographic order.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Sorted neighbours of node `i`.
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    /// Dense 0/1 adjacency matrix.
    pub fn dense_adjacency(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for &(i, j) in &self.edges {
            a[[i as usize, j as usize]] = 1.0;
            a[[j as usize, i as usize]] = 1.0;
        }
        a
    }

    /// Relabels nodes so that new node `k` is old node `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let inverse = inverse_permutation(perm, self.n)?;
        let edges: Vec<(usize, usize)> =
            self.edges.iter().map(|&(i, j)| (inverse[i as usize], inverse[j as usize])).collect();
        let mut g = Self::from_edges(
            self.n,
            &edges,
            permute_rows(self.latents.view(), perm),
            permute_rows(self.signals.view(), perm),
            self.alpha,
        )?;
        g.latent_seed = self.latent_seed;
        g.edge_seed = self.edge_seed;
        Ok(g)
    }

    /// Same graph carrying a different node signal.
    pub fn with_signals(&self, signals: Array2<f64>) -> Result<Self> {
        if signals.nrows() != self.n {
            return Err(Error::shape(format!("{} signal rows", self.n), signals.nrows()));
        }
        Ok(Self { signals, ..self.clone() })
    }

    pub fn laplacian(&self) -> NormalizedLaplacian {
        NormalizedLaplacian::new(self)
    }
}

/// `out[k] = m[perm[k]]` row-wise.
pub fn permute_rows(m: ArrayView2<'_, f64>, perm: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((perm.len(), m.ncols()), |(k, c)| m[[perm[k], c]])
}

pub fn inverse_permutation(perm: &[usize], n: usize) -> Result<Vec<usize>> {
    if perm.len() != n {
        return Err(Error::shape(format!("permutation of length {n}"), perm.len()));
    }
    let mut inverse = vec![usize::MAX; n];
    for (k, &p) in perm.iter().enumerate() {
        if p >= n || inverse[p] != usize::MAX {
            return Err(Error::Model(format!("not a permutation: entry {p} at position {k}")));
        }
        inverse[p] = k;
    }
    Ok(inverse)
}

/// Draws latents and edges with seeds derived from `seed`.
pub fn sample_graph(model: &RandomGraphModel, n: usize, seed: u64) -> Result<SampledGraph> {
    sample_graph_with_seeds(model, n, derive_seed(seed, stream::LATENT, 0), derive_seed(seed, stream::EDGE, 0))
}

/// Draws latents under `latent_seed` and edges under `edge_seed`, so edges
/// can be redrawn on fixed latents.
pub fn sample_graph_with_seeds(
    model: &RandomGraphModel,
    n: usize,
    latent_seed: u64,
    edge_seed: u64,
) -> Result<SampledGraph> {
    if n < 2 {
        return Err(Error::config("n", "a sampled graph needs at least two nodes"));
    }
    let latents = model.sample_latents(n, latent_seed)?;
    let mut g = sample_edges(model, latents, edge_seed, None)?;
    g.latent_seed = latent_seed;
    Ok(g)
}

/// Samples edges on given latent positions. Pair `{i, j}` is an edge when
/// `U(edge_seed, min(key_i, key_j), max(key_i, key_j)) < α W(x_i, x_j)`;
/// keys default to node indices. Carrying keys through a relabeling makes
/// every pair draw the same uniform, which is how exchangeability is tested.
pub fn sample_edges(
    model: &RandomGraphModel,
    latents: Array2<f64>,
    edge_seed: u64,
    keys: Option<&[u64]>,
) -> Result<SampledGraph> {
    let n = latents.nrows();
    if latents.ncols() != model.dimension() {
        return Err(Error::shape(format!("latents with {} columns", model.dimension()), latents.ncols()));
    }
    if let Some(k) = keys {
        if k.len() != n {
            return Err(Error::shape(format!("{n} node keys"), k.len()));
        }
    }
    let alpha = model.alpha(n);
    let edges = draw_edges(&model.kernel, latents.view(), alpha, edge_seed, keys)?;
    let signals = model.signal.evaluate_rows(latents.view());
    Ok(SampledGraph::assemble(n, edges, latents, signals, alpha, 0, edge_seed))
}

fn draw_edges(
    kernel: &Kernel,
    latents: ArrayView2<'_, f64>,
    alpha: f64,
    edge_seed: u64,
    keys: Option<&[u64]>,
) -> Result<Vec<(u32, u32)>> {
    let n = latents.nrows();
    let rows: Vec<Vec<f64>> = latents.rows().into_iter().map(|r| r.to_vec()).collect();
    let key = |i: usize| keys.map_or(i as u64, |k| k[i]);
    let per_row: Vec<Result<Vec<(u32, u32)>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            for j in i + 1..n {
                let p = alpha * kernel.eval(&rows[i], &rows[j]);
                if !(0.0..=1.0 + PROBABILITY_SLACK).contains(&p) {
                    return Err(Error::Model(format!("edge probability alpha*W = {p} at pair ({i}, {j}) outside [0, 1]")));
                }
                let (a, b) = (key(i).min(key(j)), key(i).max(key(j)));
                if unit_uniform(edge_seed, stream::EDGE, a, b) < p {
                    out.push((i as u32, j as u32));
                }
            }
            Ok(out)
        })
        .collect();
    let mut edges = Vec::new();
    for r in per_row {
        edges.extend(r?);
    }
    Ok(edges)
}

/// Normalized degree signal `A 1 / (α n)`.
pub fn degree_input_signal(graph: &SampledGraph, alpha: f64) -> Result<Array1<f64>> {
    if !(alpha > 0.0) {
        return Err(Error::config("alpha", "must be positive"));
    }
    let scale = alpha * graph.n() as f64;
    Ok(Array1::from_shape_fn(graph.n(), |i| graph.degree(i) as f64 / scale))
}

#[cfg(test)]
mod tests;
