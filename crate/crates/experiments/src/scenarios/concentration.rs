use rgcn_core::graph::sample_graph_with_seeds;
use rgcn_core::metrics::laplacian_spectral_distance;
use rgcn_core::model::Sparsity;
use rgcn_core::Result;

use super::{graph_seeds, isolated_flag, run_tasks, RowContext};
use crate::config::ExperimentConfig;
use crate::table::ResultTable;

/// Spectral distance between the sampled and expected normalized
/// Laplacians, raw and multiplied by `√(α n)`.
pub fn run_concentration_check(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let grid: Vec<(usize, Sparsity)> = if cfg.points.is_empty() {
        cfg.alpha_grid.iter().flat_map(|&sp| cfg.n_grid.iter().map(move |&n| (n, sp))).collect()
    } else {
        cfg.points.iter().map(|&(n, a)| (n, Sparsity::Constant(a))).collect()
    };
    let mut tasks = Vec::new();
    for (n, sp) in grid {
        for rep in 0..cfg.repeats {
            tasks.push((n, sp, rep));
        }
    }
    let k = &cfg.model.kernel;
    let rate = k.c_max / (k.c_min * k.c_min);
    run_tasks(tasks, |&(n, sp, rep)| {
        let model = cfg.model.with_sparsity(sp)?;
        let (ls, es) = graph_seeds(cfg.seed, rep);
        let ctx = RowContext::new(cfg.scenario, n, model.alpha(n), rep);
        let graph = sample_graph_with_seeds(&model, n, ls, es)?;
        let value = laplacian_spectral_distance(&graph, &model, true)?;
        let scale = (graph.alpha * n as f64).sqrt();
        let mut flags = Vec::new();
        if graph.alpha < rate * (n as f64).ln() / n as f64 {
            flags.push("below-sparsity-threshold".to_string());
        }
        isolated_flag(&graph, &mut flags);
        Ok(vec![
            ctx.row("laplacian_distance", 0.0, value, Some(rate / scale), flags.clone()),
            ctx.row("normalized_distance", 0.0, value * scale, Some(rate), flags),
        ])
    })
}
