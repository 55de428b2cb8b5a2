use proptest::prelude::*;
use rgcn_core::bounds::{
    compute_filter_norms, degree_deformation_bound, stability_envelope, StabilityConstants, StabilityInputs, TheoremConstants,
};
use rgcn_core::gcn::{Activation, GcnParams, ScalePolicy};
use rgcn_core::model::fixtures;

const MODELS: [&str; 4] = ["uniform-line-gauss", "uniform-square-gauss", "bumped-surface-gauss", "epsilon-line"];

fn widths_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..5, 2..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn envelope_shrinks_with_n_and_grows_with_confidence(
        widths in widths_strategy(), order in 1usize..4, seed: u64, model in 0usize..4,
        alpha in 0.05f64..1.0, rho in 0.001f64..0.5, n in 10usize..100_000,
    ) {
        let p = GcnParams::random(&widths, order, seed, ScalePolicy::Fixed(1.0), Activation::Relu).unwrap();
        let tc = TheoremConstants::from_network(&p, &fixtures::model(MODELS[model]).unwrap());
        prop_assert!(tc.r_n(2 * n, alpha, rho) < tc.r_n(n, alpha, rho));
        let (loose, tight) = (tc.envelope(n, alpha, rho), tc.envelope(n, alpha, rho / 2.0));
        prop_assert!(tight.r_n >= loose.r_n);
        prop_assert!(tight.invariant_bound >= loose.invariant_bound);
        prop_assert!(tc.envelope(2 * n, alpha, rho).invariant_bound < loose.invariant_bound);
        prop_assert!(tc.r_n(n, alpha / 2.0, rho) > tc.r_n(n, alpha, rho));
    }

    #[test]
    fn stability_bounds_scale_with_the_signal_and_the_gradient(
        widths in widths_strategy(), order in 0usize..4, seed: u64, t in 0.01f64..0.2, s in 0.1f64..10.0,
    ) {
        let model = fixtures::model("uniform-square-gauss").unwrap();
        let p = GcnParams::random(&widths, order, seed, ScalePolicy::Fixed(1.0), Activation::Tanh).unwrap();
        let norms = compute_filter_norms(&p, model.kernel.c_max, model.kernel.c_min);
        let sc = StabilityConstants::new(&norms, model.kernel.c_min, 1.0);
        let size = model.deformation_size(&fixtures::deformation("scaling", 2, t).unwrap(), 500, seed).unwrap();
        let base = StabilityInputs { signal_norm: 1.0, size, signal_gap: Some(0.0) };
        let (a, b) = (stability_envelope(sc, &base), stability_envelope(sc, &StabilityInputs { signal_norm: s, ..base }));
        for (x, y) in [(a.kernel, b.kernel), (a.distribution_general, b.distribution_general), (a.signal, b.signal)] {
            if let (Some(x), Some(y)) = (x, y) {
                prop_assert!((s * x - y).abs() <= 1e-12 * y.abs().max(1e-300));
            }
        }
        // the kernel bound is linear in the gradient size
        let mut doubled = size;
        doubled.sup_grad_tau *= 2.0;
        let c = stability_envelope(sc, &StabilityInputs { size: doubled, ..base });
        if let (Some(k1), Some(k2)) = (a.kernel, c.kernel) {
            prop_assert!((2.0 * k1 - k2).abs() <= 1e-12 * k2.abs().max(1e-300));
        }
    }
}

#[test]
fn degree_gap_respects_its_bound() {
    let model = fixtures::model("uniform-line-gauss").unwrap();
    for kind in ["scaling", "gaussian-bump"] {
        for (i, t) in [0.02, 0.08, 0.15].into_iter().enumerate() {
            let tau = fixtures::deformation(kind, 1, t).unwrap();
            let size = model.deformation_size(&tau, 5000, 3 + i as u64).unwrap();
            let bound = degree_deformation_bound(&size).expect("gaussian kernels have a gradient constant");
            let gap = model.deformed_degree_gap(&tau, 500, 1000, 5 + i as u64);
            assert!(gap.value <= bound + 3.0 * gap.std_error, "{kind}@{t}: {} > {bound}", gap.value);
        }
    }
}

#[test]
fn zero_deformation_has_no_degree_gap() {
    let model = fixtures::model("uniform-square-gauss").unwrap();
    let tau = fixtures::deformation("gaussian-bump", 2, 0.0).unwrap();
    assert_eq!(model.deformed_degree_gap(&tau, 100, 200, 1).value, 0.0);
    assert_eq!(degree_deformation_bound(&model.deformation_size(&tau, 100, 1).unwrap()), Some(0.0));
}
