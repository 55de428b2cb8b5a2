use rgcn_core::bounds::TheoremConstants;
use rgcn_core::cgcn::{cgcn_forward, evaluate_at, ReferenceOperator};
use rgcn_core::metrics::mse_x;
use rgcn_core::model::Sparsity;
use rgcn_core::rng::{derive_seed, stream};
use rgcn_core::Result;

use super::{distance, envelope_flags, graph_seeds, mean_rows, run_tasks, sample_and_forward, RowContext};
use crate::config::{ExperimentConfig, InputKind};
use crate::table::ResultTable;

fn tasks(cfg: &ExperimentConfig) -> Vec<(Sparsity, usize, usize)> {
    let mut out = Vec::new();
    for &sp in &cfg.alpha_grid {
        for &n in &cfg.n_grid {
            for rep in 0..cfg.repeats {
                out.push((sp, n, rep));
            }
        }
    }
    out
}

/// Errors of sampled GCNs against a c-GCN evaluated on a large reference
/// sample: invariant outputs by Euclidean distance, equivariant outputs by
/// node-level MSE against the out-of-sample extension.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let params = cfg.network.build()?;
    let reference = ReferenceOperator::build(&cfg.model, cfg.n_ref, derive_seed(cfg.seed, stream::MONTE_CARLO, 0))?;
    let solution = cgcn_forward(&params, &reference, &cfg.model.signal)?;
    let constants = TheoremConstants::from_network(&params, &cfg.model);
    run_tasks(tasks(cfg), |&(sp, n, rep)| {
        let model = cfg.model.with_sparsity(sp)?;
        let (ls, es) = graph_seeds(cfg.seed, rep);
        let ctx = RowContext::new(cfg.scenario, n, model.alpha(n), rep);
        let (graph, out) = sample_and_forward(&params, &model, InputKind::Signal, n, ls, es)?;
        let env = constants.envelope(n, graph.alpha, cfg.rho);
        let flags = envelope_flags(&env, &graph);
        let inv_err = distance(mean_rows(&out).view(), solution.invariant.view());
        let mut rows = vec![ctx.row("invariant_error", 0.0, inv_err, Some(env.invariant_bound), flags.clone())];
        if cfg.equivariant {
            let target = evaluate_at(&reference, &params, &cfg.model.signal, &solution, graph.latents.view())?;
            let err = mse_x(out.view(), target.view())?;
            rows.push(ctx.row("equivariant_mse", 0.0, err, Some(env.r_n), flags));
        }
        Ok(rows)
    })
}

/// Invariant errors at several sparsity levels against a limit proxy: the
/// mean invariant output of dense graphs at twice the largest grid size.
pub fn run_sparsity_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let params = cfg.network.build()?;
    let constants = TheoremConstants::from_network(&params, &cfg.model);
    let proxy_n = 2 * cfg.n_grid.last().unwrap();
    let dense = cfg.model.with_sparsity(Sparsity::Constant(1.0))?;
    let proxy_seed = derive_seed(cfg.seed, stream::MONTE_CARLO, 1);
    let mut proxy: Option<ndarray::Array1<f64>> = None;
    for rep in 0..cfg.proxy_repeats {
        let (ls, es) = graph_seeds(proxy_seed, rep);
        let (_, out) = sample_and_forward(&params, &dense, InputKind::Signal, proxy_n, ls, es)?;
        let inv = mean_rows(&out);
        proxy = Some(match proxy {
            None => inv,
            Some(acc) => acc + inv,
        });
    }
    let proxy = proxy.expect("proxy_repeats >= 1") / cfg.proxy_repeats as f64;
    run_tasks(tasks(cfg), |&(sp, n, rep)| {
        let model = cfg.model.with_sparsity(sp)?;
        let (ls, es) = graph_seeds(cfg.seed, rep);
        let ctx = RowContext::new(cfg.scenario, n, model.alpha(n), rep);
        let (graph, out) = sample_and_forward(&params, &model, InputKind::Signal, n, ls, es)?;
        let env = constants.envelope(n, graph.alpha, cfg.rho);
        let err = distance(mean_rows(&out).view(), proxy.view());
        Ok(vec![ctx.row("invariant_error", 0.0, err, Some(env.invariant_bound), envelope_flags(&env, &graph))])
    })
}
