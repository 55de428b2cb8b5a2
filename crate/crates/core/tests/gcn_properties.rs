use ndarray::{Array1, Array2, Array3, Axis};
use proptest::prelude::*;
use rgcn_core::bounds::{compute_filter_norms, NormKind};
use rgcn_core::gcn::{
    apply_filter, forward_equivariant, forward_invariant, forward_trace, forward_with_noise, Activation, GcnParams, ScalePolicy,
};
use rgcn_core::graph::{permute_rows, sample_graph, SampledGraph};
use rgcn_core::linalg::symmetric_eigen;
use rgcn_core::model::{fixtures, Sparsity};
use rgcn_core::rng::{mix, unit_uniform};

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |(i, j)| 2.0 * unit_uniform(seed, 7, i as u64, j as u64) - 1.0)
}

fn random_perm(n: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.sort_by_key(|&i| mix(seed, 8, i as u64, 0));
    p
}

fn graph(fixture: usize, n: usize, sparse: bool, seed: u64) -> SampledGraph {
    const NAMES: [&str; 4] = ["uniform-line-gauss", "epsilon-line", "uniform-square-gauss", "sbm-constant-degree"];
    let mut m = fixtures::model(NAMES[fixture % NAMES.len()]).unwrap();
    if sparse {
        m = m.with_sparsity(Sparsity::Constant(0.1)).unwrap();
    }
    sample_graph(&m, n, seed).unwrap()
}

fn network(widths: &[usize], order: usize, act: usize, seed: u64, with_bias: bool) -> GcnParams {
    let p = GcnParams::random(widths, order, seed, ScalePolicy::Fixed(1.0), Activation::ALL[act % 3]).unwrap();
    if !with_bias {
        return p;
    }
    let biases = widths[1..].iter().enumerate().map(|(l, &w)| Array1::from_shape_fn(w, |j| unit_uniform(seed, 9, l as u64, j as u64) - 0.5)).collect();
    p.with_biases(biases).unwrap()
}

fn frobenius(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn widths_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..5, 2..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn equivariance_and_invariance(
        n in 2usize..40, fixture in 0usize..4, sparse: bool, widths in widths_strategy(),
        order in 0usize..4, act in 0usize..3, seed: u64,
    ) {
        let g = graph(fixture, n, sparse, seed);
        let p = network(&widths, order, act, seed, true);
        let z = random_matrix(n, widths[0], seed);
        let perm = random_perm(n, seed);
        let gp = g.permuted(&perm).unwrap();
        let zp = permute_rows(z.view(), &perm);
        let expect = permute_rows(forward_equivariant(&p, &g.laplacian(), z.view()).unwrap().view(), &perm);
        let got = forward_equivariant(&p, &gp.laplacian(), zp.view()).unwrap();
        for (a, b) in got.iter().zip(&expect) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
        let a = forward_invariant(&p, &g.laplacian(), z.view()).unwrap();
        let b = forward_invariant(&p, &gp.laplacian(), zp.view()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn filter_matches_spectral_oracle(n in 2usize..128, fixture in 0usize..4, sparse: bool, k in 0usize..5, seed: u64) {
        let l = graph(fixture, n, sparse, seed).laplacian();
        let c = Array3::from_shape_fn((k + 1, 2, 2), |(a, b, e)| unit_uniform(seed, 10, (a * 4 + b) as u64, e as u64) - 0.5);
        let z = random_matrix(n, 2, seed ^ 1);
        let got = apply_filter(c.view(), &l, z.view()).unwrap();
        let (vals, u) = symmetric_eigen(l.to_dense().view());
        let uz = u.t().dot(&z);
        let mut expect = Array2::<f64>::zeros((n, 2));
        for kk in 0..=k {
            let pw = Array1::from_iter(vals.iter().map(|&lam| lam.powi(kk as i32)));
            expect += &u.dot(&(&uz * &pw.insert_axis(Axis(1)))).dot(&c.index_axis(Axis(0), kk).t());
        }
        let scale = expect.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for (a, b) in got.iter().zip(&expect) {
            prop_assert!((a - b).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn outputs_are_lipschitz_in_the_input(
        n in 2usize..40, fixture in 0usize..4, sparse: bool, widths in widths_strategy(),
        order in 0usize..4, act in 0usize..3, seed: u64, step in -4i32..1,
    ) {
        let g = graph(fixture, n, sparse, seed);
        let l = g.laplacian();
        let p = network(&widths, order, act, seed, true);
        let z1 = random_matrix(n, widths[0], seed);
        let z2 = &z1 + &(random_matrix(n, widths[0], seed ^ 2) * 10f64.powi(step));
        let last = |z: &Array2<f64>| forward_trace(&p, &l, z.view()).unwrap().layers.pop().unwrap();
        let lip = compute_filter_norms(&p, 1.0, 0.5).lipschitz_constant();
        prop_assert!(frobenius(&(last(&z1) - last(&z2))) <= lip * frobenius(&(&z1 - &z2)) * (1.0 + 1e-12));
    }

    #[test]
    fn layer_norms_stay_below_their_recursion(
        n in 2usize..40, fixture in 0usize..4, sparse: bool, widths in widths_strategy(),
        order in 0usize..4, act in 0usize..3, seed: u64,
    ) {
        let l = graph(fixture, n, sparse, seed).laplacian();
        let p = network(&widths, order, act, seed, true);
        let z = random_matrix(n, widths[0], seed);
        let root_n = (n as f64).sqrt();
        let bounds = compute_filter_norms(&p, 1.0, 0.5).layer_bounds(frobenius(&z) / root_n, NormKind::L2);
        for (layer, bound) in forward_trace(&p, &l, z.view()).unwrap().layers.iter().zip(&bounds) {
            prop_assert!(frobenius(layer) / root_n <= bound * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn zero_bias_networks_are_positively_homogeneous(
        n in 2usize..30, fixture in 0usize..4, widths in widths_strategy(), order in 0usize..3,
        relu: bool, seed: u64, s in 0.01f64..100.0,
    ) {
        let l = graph(fixture, n, false, seed).laplacian();
        let p = network(&widths, order, if relu { 0 } else { 1 }, seed, false);
        let z = random_matrix(n, widths[0], seed);
        let a = forward_equivariant(&p, &l, (&z * s).view()).unwrap();
        let b = forward_equivariant(&p, &l, z.view()).unwrap() * s;
        let scale = b.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }
}

#[test]
fn presmoothed_noise_fades_with_graph_size() {
    let model = fixtures::model("uniform-line-gauss").unwrap();
    let p = GcnParams::random(&[1, 4, 2], 2, 3, ScalePolicy::Fixed(1.0), Activation::Relu).unwrap();
    let deviation = |n: usize| -> f64 {
        (0..10u64)
            .map(|s| {
                let g = sample_graph(&model, n, s).unwrap();
                let l = g.laplacian();
                let clean = forward_with_noise(&p, &l, g.signals.view(), 0.0, true, s).unwrap();
                let noisy = forward_with_noise(&p, &l, g.signals.view(), 1.0, true, s).unwrap();
                let diff = clean.mean_axis(Axis(0)).unwrap() - noisy.mean_axis(Axis(0)).unwrap();
                diff.iter().map(|v| v * v).sum::<f64>().sqrt()
            })
            .sum::<f64>()
            / 10.0
    };
    let d: Vec<f64> = [500, 2000, 4000].into_iter().map(deviation).collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}
