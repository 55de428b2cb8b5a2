use ndarray::Array2;
use rgcn_core::graph::sample_edges;
use rgcn_core::metrics::{mse_sigma_entropic, mse_sigma_exact, mse_x, SinkhornOptions, EXACT_CAP};
use rgcn_core::model::DeformTarget;
use rgcn_core::Result;

use super::amplitude::deformation_envelope;
use super::{forward_on, graph_seeds, redraw_seed, run_tasks, sample_and_forward, RowContext};
use crate::config::{Coupling, ExperimentConfig, Scenario};
use crate::table::ResultTable;

/// Equivariant output differences at fixed latents: a baseline graph against
/// a redraw of its edges and, for `stability-deform`, against graphs on
/// deformed latents sampled with the baseline edge seed (or the redraw seed
/// under independent coupling).
pub fn run_stability(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let params = cfg.network.build()?;
    let dim = cfg.model.dimension();
    let mut deformed = Vec::new();
    let mut coupling = Coupling::Shared;
    if cfg.scenario == Scenario::StabilityDeform {
        let tau_cfg = cfg.tau.as_ref().expect("validated");
        coupling = tau_cfg.coupling;
        for &t in &tau_cfg.amplitudes {
            let tau = tau_cfg.deformation(dim, t)?;
            cfg.model.check_deformation_support(&tau)?;
            let env = deformation_envelope(cfg, &params, &tau, DeformTarget::Distribution)?;
            deformed.push((t, tau, env));
        }
    }
    let mut tasks = Vec::new();
    for &sp in &cfg.alpha_grid {
        for &n in &cfg.n_grid {
            for rep in 0..cfg.repeats {
                tasks.push((sp, n, rep));
            }
        }
    }
    run_tasks(tasks, |&(sp, n, rep)| {
        let model = cfg.model.with_sparsity(sp)?;
        let (ls, es) = graph_seeds(cfg.seed, rep);
        let ctx = RowContext::new(cfg.scenario, n, model.alpha(n), rep);
        let (graph, base) = sample_and_forward(&params, &model, cfg.input, n, ls, es)?;
        let (_, redraw) = sample_and_forward(&params, &model, cfg.input, n, ls, redraw_seed(es))?;
        let mut rows = vec![ctx.row("edge_redraw_diff", 0.0, mse_x(base.view(), redraw.view())?, None, vec![])];
        let deform_seed = match coupling {
            Coupling::Shared => es,
            Coupling::Independent => redraw_seed(es),
        };
        for (t, tau, env) in &deformed {
            let mut moved = Array2::zeros(graph.latents.raw_dim());
            for (x, mut y) in graph.latents.rows().into_iter().zip(moved.rows_mut()) {
                tau.apply(x.as_slice().expect("row-major"), y.as_slice_mut().expect("row-major"));
            }
            let g = sample_edges(&model, moved, deform_seed, None)?;
            let out = forward_on(&params, &g, cfg.input)?;
            rows.push(ctx.row("deform_diff", *t, mse_x(base.view(), out.view())?, env.value, env.flags.clone()));
            let (sigma, mut flags) = if n <= EXACT_CAP {
                (mse_sigma_exact(base.view(), out.view())?.value, env.flags.clone())
            } else {
                let r = mse_sigma_entropic(base.view(), out.view(), SinkhornOptions::default())?;
                let mut f = env.flags.clone();
                f.push("entropic".to_string());
                if !r.converged {
                    f.push("not-converged".to_string());
                }
                (r.value(), f)
            };
            flags.sort();
            rows.push(ctx.row("deform_diff_sigma", *t, sigma, env.value, flags));
        }
        Ok(rows)
    })
}
