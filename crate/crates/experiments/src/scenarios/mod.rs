//! Scenario runners. Each grid point and repeat is an independent task with
//! seeds derived from the configuration seed, so tables do not depend on the
//! number of workers.

mod amplitude;
mod concentration;
mod convergence;
mod stability;

use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;
use rgcn_core::bounds::Theorem1Envelope;
use rgcn_core::gcn::{forward_equivariant, GcnParams};
use rgcn_core::graph::{degree_input_signal, sample_graph_with_seeds, SampledGraph};
use rgcn_core::model::RandomGraphModel;
use rgcn_core::rng::{derive_seed, stream};
use rgcn_core::Result;

pub use amplitude::run_amplitude_sweep;
pub use concentration::run_concentration_check;
pub use convergence::{run_convergence, run_sparsity_sweep};
pub use stability::run_stability;

use crate::config::{ExperimentConfig, InputKind, Scenario};
use crate::table::{ResultRow, ResultTable};

/// Runs the configured scenario and returns its sorted table.
pub fn run(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let mut table = match cfg.scenario {
        Scenario::Convergence => run_convergence(cfg)?,
        Scenario::SparsitySweep => run_sparsity_sweep(cfg)?,
        Scenario::StabilityEdges | Scenario::StabilityDeform => run_stability(cfg)?,
        Scenario::DeformAmplitudeSweep => run_amplitude_sweep(cfg)?,
        Scenario::ConcentrationCheck => run_concentration_check(cfg)?,
    };
    table.sort();
    table.check_finite()?;
    Ok(table)
}

/// Latent and edge seeds of repeat `rep`. They depend on neither `n` nor `α`:
/// latents are drawn per index, so smaller graphs are prefixes of larger
/// ones and sparsity levels share latents with nested edge sets.
pub(crate) fn graph_seeds(seed: u64, rep: usize) -> (u64, u64) {
    let latent = derive_seed(seed, stream::LATENT, rep as u64);
    let edge = derive_seed(seed, stream::EDGE, rep as u64);
    (latent, edge)
}

/// An independent edge seed for redrawing edges on the same latents.
pub(crate) fn redraw_seed(edge_seed: u64) -> u64 {
    derive_seed(edge_seed, stream::EDGE, 1)
}

pub(crate) fn input_signal(input: InputKind, graph: &SampledGraph) -> Result<Array2<f64>> {
    match input {
        InputKind::Signal => Ok(graph.signals.clone()),
        InputKind::Degree => Ok(degree_input_signal(graph, graph.alpha)?.insert_axis(ndarray::Axis(1))),
    }
}

/// Samples a graph and runs the equivariant network on it.
pub(crate) fn sample_and_forward(
    params: &GcnParams,
    model: &RandomGraphModel,
    input: InputKind,
    n: usize,
    latent_seed: u64,
    edge_seed: u64,
) -> Result<(SampledGraph, Array2<f64>)> {
    let graph = sample_graph_with_seeds(model, n, latent_seed, edge_seed)?;
    let out = forward_on(params, &graph, input)?;
    Ok((graph, out))
}

pub(crate) fn forward_on(params: &GcnParams, graph: &SampledGraph, input: InputKind) -> Result<Array2<f64>> {
    let z = input_signal(input, graph)?;
    forward_equivariant(params, &graph.laplacian(), z.view())
}

pub(crate) fn distance(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn mean_rows(m: &Array2<f64>) -> Array1<f64> {
    rgcn_core::gcn::row_mean(m.view())
}

pub(crate) fn envelope_flags(env: &Theorem1Envelope, graph: &SampledGraph) -> Vec<String> {
    let mut flags = Vec::new();
    if !env.size_condition {
        flags.push("below-size-threshold".to_string());
    }
    if !env.sparsity_condition {
        flags.push("below-sparsity-threshold".to_string());
    }
    isolated_flag(graph, &mut flags);
    flags
}

pub(crate) fn isolated_flag(graph: &SampledGraph, flags: &mut Vec<String>) {
    let isolated = (0..graph.n()).filter(|&i| graph.degree(i) == 0).count();
    if isolated > 0 {
        flags.push(format!("isolated={isolated}"));
    }
}

/// Common fields of the rows produced by one task.
pub(crate) struct RowContext {
    pub scenario: Scenario,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    pub started: Instant,
}

impl RowContext {
    pub fn new(scenario: Scenario, n: usize, alpha: f64, rep: usize) -> Self {
        Self { scenario, n, alpha, seed: rep as u64, started: Instant::now() }
    }

    pub fn row(&self, metric: &str, amplitude: f64, value: f64, envelope: Option<f64>, flags: Vec<String>) -> ResultRow {
        ResultRow {
            scenario: self.scenario.name().to_string(),
            n: self.n,
            alpha: self.alpha,
            amplitude,
            seed: self.seed,
            metric: metric.to_string(),
            value,
            envelope,
            flags,
            wall_ms: self.started.elapsed().as_millis() as u64,
        }
    }
}

/// Runs tasks on the current rayon pool and concatenates their rows; the
/// first error (in task order) wins.
pub(crate) fn run_tasks<T, F>(tasks: Vec<T>, f: F) -> Result<ResultTable>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<ResultRow>> + Sync,
{
    let results: Vec<Result<Vec<ResultRow>>> = tasks.par_iter().map(&f).collect();
    let mut table = ResultTable::default();
    for r in results {
        table.extend(r?);
    }
    Ok(table)
}
