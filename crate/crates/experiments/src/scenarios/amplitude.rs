use rgcn_core::bounds::{compute_filter_norms, degree_deformation_bound, stability_envelope, StabilityConstants, StabilityInputs};
use rgcn_core::gcn::GcnParams;
use rgcn_core::linalg::spectral_norm;
use rgcn_core::model::{mean_with_error, DeformTarget, Deformation, RandomGraphModel};
use rgcn_core::rng::{derive_seed, stream};
use rgcn_core::Result;

use super::{distance, graph_seeds, mean_rows, redraw_seed, run_tasks, sample_and_forward, RowContext};
use crate::config::{Coupling, ExperimentConfig, InputKind};
use crate::table::ResultTable;

/// Stability envelope of one deformation, with the flags that qualify it.
pub(crate) struct DeformationEnvelope {
    pub value: Option<f64>,
    pub flags: Vec<String>,
}

/// `‖f ∘ (Id − τ) − f‖_{L²(P)}` by Monte Carlo.
fn signal_gap(model: &RandomGraphModel, tau: &Deformation, n_mc: usize, seed: u64) -> f64 {
    let xs = model.distribution.sample(n_mc.max(1), derive_seed(seed, stream::MONTE_CARLO, 7));
    let squares: Vec<f64> = xs
        .rows()
        .into_iter()
        .map(|x| {
            let x = x.as_slice().expect("row-major");
            let a = model.signal.eval_vec(&tau.apply_vec(x));
            let b = model.signal.eval_vec(x);
            a.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum()
        })
        .collect();
    mean_with_error(&squares).value.sqrt()
}

pub(crate) fn deformation_envelope(
    cfg: &ExperimentConfig,
    params: &GcnParams,
    tau: &Deformation,
    target: DeformTarget,
) -> Result<DeformationEnvelope> {
    let model = &cfg.model;
    let mc_seed = derive_seed(cfg.seed, stream::MONTE_CARLO, 2);
    let size = model.deformation_size(tau, cfg.mc_samples, mc_seed)?;
    let norms = compute_filter_norms(params, model.kernel.c_max, model.kernel.c_min);
    let constants = StabilityConstants::new(&norms, model.kernel.c_min, spectral_norm(params.readout_weights()));
    let signal_norm = match cfg.input {
        InputKind::Signal => model.signal_l2_norm(cfg.mc_samples, mc_seed).value,
        // ‖d_{W,P}‖ is at most c_max
        InputKind::Degree => model.kernel.c_max,
    };
    let signal_gap = match cfg.input {
        InputKind::Signal => Some(signal_gap(model, tau, cfg.mc_samples, mc_seed)),
        InputKind::Degree => degree_deformation_bound(&size),
    };
    let env = stability_envelope(constants, &StabilityInputs { signal_norm, size, signal_gap });
    let value = match target {
        DeformTarget::Kernel => env.kernel,
        DeformTarget::Distribution => env.distribution_translation_invariant.or(env.distribution_general),
        DeformTarget::Signal => env.signal,
    };
    let mut flags = Vec::new();
    if size.sup_grad_tau > 0.5 {
        flags.push("grad-tau-above-half".to_string());
    }
    if value.is_none() {
        flags.push("envelope-unavailable".to_string());
    }
    Ok(DeformationEnvelope { value, flags })
}

/// Invariant output differences between a model and its deformation, over
/// the amplitude grid, plus the edge-redraw noise floor of the undeformed
/// model.
pub fn run_amplitude_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let tau_cfg = cfg.tau.as_ref().expect("validated");
    let params = cfg.network.build()?;
    let dim = cfg.model.dimension();
    let mut deformed = Vec::with_capacity(tau_cfg.amplitudes.len());
    for &t in &tau_cfg.amplitudes {
        let tau = tau_cfg.deformation(dim, t)?;
        let env = deformation_envelope(cfg, &params, &tau, tau_cfg.target)?;
        deformed.push((t, tau, env));
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
        let (_, base) = sample_and_forward(&params, &model, cfg.input, n, ls, es)?;
        let base = mean_rows(&base);
        let (_, redraw) = sample_and_forward(&params, &model, cfg.input, n, ls, redraw_seed(es))?;
        let mut rows = vec![ctx.row("edge_redraw_floor", 0.0, distance(base.view(), mean_rows(&redraw).view()), None, vec![])];
        for (t, tau, env) in &deformed {
            let other = model.deform(tau, tau_cfg.target)?;
            let edge_seed = match tau_cfg.coupling {
                Coupling::Shared => es,
                Coupling::Independent => redraw_seed(es),
            };
            let (_, out) = sample_and_forward(&params, &other, cfg.input, n, ls, edge_seed)?;
            let diff = distance(base.view(), mean_rows(&out).view());
            rows.push(ctx.row("invariant_diff", *t, diff, env.value, env.flags.clone()));
        }
        Ok(rows)
    })
}
