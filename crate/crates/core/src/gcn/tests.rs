use std::sync::atomic::{AtomicUsize, Ordering};

use ndarray::{array, Array1, Array2, Array3};

use super::*;
use crate::graph::{permute_rows, sample_graph, SampledGraph};
use crate::linalg::{spectral_norm, symmetric_eigen};
use crate::model::fixtures;
use crate::rng::{mix, unit_uniform};

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |(i, j)| 2.0 * unit_uniform(seed, 1, i as u64, j as u64) - 1.0)
}

fn random_perm(n: usize, seed: u64) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.sort_by_key(|&i| mix(seed, 2, i as u64, 0));
    p
}

fn triangle() -> NormalizedLaplacian {
    SampledGraph::structural(3, &[(0, 1), (1, 2), (0, 2)]).unwrap().laplacian()
}

struct Counting<'a> {
    inner: &'a NormalizedLaplacian,
    calls: AtomicUsize,
}

impl SignalOperator for Counting<'_> {
    fn size(&self) -> usize {
        self.inner.n()
    }
    fn apply_into(&self, v: ndarray::ArrayView2<'_, f64>, out: ndarray::ArrayViewMut2<'_, f64>) {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.apply_into(v, out)
    }
}

#[test]
fn order_zero_identity_filter() {
    let l = triangle();
    let z = random_matrix(3, 2, 1);
    let mut c = Array3::zeros((1, 2, 2));
    c.index_axis_mut(ndarray::Axis(0), 0).assign(&Array2::eye(2));
    assert_eq!(apply_filter(c.view(), &l, z.view()).unwrap(), z);
}

#[test]
fn first_order_filter_on_triangle() {
    let l = triangle();
    let c = Array3::from_shape_vec((2, 1, 1), vec![0.0, 1.0]).unwrap();
    let out = apply_filter(c.view(), &l, Array2::ones((3, 1)).view()).unwrap();
    assert_eq!(out, Array2::ones((3, 1)));
}

#[test]
fn filter_matches_dense_polynomial() {
    let g = sample_graph(&fixtures::model("uniform-line-gauss").unwrap(), 20, 3).unwrap();
    let l = g.laplacian();
    let dense = l.to_dense();
    let c = Array3::from_shape_fn((3, 2, 3), |(k, i, j)| unit_uniform(5, k as u64, i as u64, j as u64) - 0.5);
    let z = random_matrix(20, 3, 2);
    let got = apply_filter(c.view(), &l, z.view()).unwrap();
    let mut expect = Array2::zeros((20, 2));
    let mut lk = Array2::eye(20);
    for k in 0..3 {
        expect += &lk.dot(&z).dot(&c.index_axis(ndarray::Axis(0), k).t());
        lk = lk.dot(&dense);
    }
    let scale = expect.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(got.iter().zip(&expect).all(|(a, b)| (a - b).abs() <= 1e-11 * scale));
}

#[test]
fn filter_matches_eigendecomposition() {
    let g = sample_graph(&fixtures::model("epsilon-line").unwrap(), 100, 8).unwrap();
    let l = g.laplacian();
    let (vals, u) = symmetric_eigen(l.to_dense().view());
    let coeffs = [0.3, -1.2, 0.7, 0.25, -0.4];
    let c = Array3::from_shape_vec((5, 1, 1), coeffs.to_vec()).unwrap();
    let z = random_matrix(100, 1, 4);
    let got = apply_filter(c.view(), &l, z.view()).unwrap();
    let h = Array1::from_iter(vals.iter().map(|&lam| coeffs.iter().rev().fold(0.0, |acc, b| acc * lam + b)));
    let expect = u.dot(&(&u.t().dot(&z) * &h.insert_axis(ndarray::Axis(1))));
    let scale = expect.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(got.iter().zip(&expect).all(|(a, b)| (a - b).abs() <= 1e-9 * scale));
}

#[test]
fn filter_uses_exactly_k_applications() {
    let l = triangle();
    let counting = Counting { inner: &l, calls: AtomicUsize::new(0) };
    let c = Array3::zeros((4, 1, 1));
    apply_filter(c.view(), &counting, Array2::ones((3, 1)).view()).unwrap();
    assert_eq!(counting.calls.load(Ordering::Relaxed), 3);
}

#[test]
fn filter_shape_errors() {
    let l = triangle();
    let c = Array3::zeros((2, 1, 2));
    assert!(matches!(apply_filter(c.view(), &l, Array2::ones((3, 1)).view()), Err(Error::Shape { .. })));
    assert!(matches!(apply_filter(c.view(), &l, Array2::ones((4, 2)).view()), Err(Error::Shape { .. })));
}

#[test]
fn zero_layer_network_is_identity() {
    let l = triangle();
    let z = random_matrix(3, 2, 9);
    assert_eq!(forward_equivariant(&GcnParams::identity(2), &l, z.view()).unwrap(), z);
}

#[test]
fn input_independent_network() {
    let l = triangle();
    let p = GcnParams::new(
        vec![1, 2],
        1,
        vec![Array3::zeros((2, 2, 1))],
        vec![array![0.7, -0.3]],
        Array2::eye(2),
        Array1::zeros(2),
        Activation::Relu,
    )
    .unwrap();
    let out = forward_equivariant(&p, &l, random_matrix(3, 1, 2).view()).unwrap();
    for row in out.rows() {
        assert_eq!(row.to_vec(), vec![0.7, 0.0]);
    }
    assert_eq!(forward_invariant(&p, &l, random_matrix(3, 1, 2).view()).unwrap().to_vec(), vec![0.7, 0.0]);
}

#[test]
fn permutation_equivariance_and_invariance() {
    let g = sample_graph(&fixtures::model("uniform-line-gauss").unwrap(), 30, 1).unwrap();
    let l = g.laplacian();
    let z = random_matrix(30, 2, 5);
    for act in Activation::ALL {
        let p = GcnParams::random(&[2, 5, 3], 2, 7, ScalePolicy::Fixed(1.0), act).unwrap();
        let base = forward_equivariant(&p, &l, z.view()).unwrap();
        let inv = forward_invariant(&p, &l, z.view()).unwrap();
        for s in 0..20 {
            let perm = random_perm(30, s);
            let gp = g.permuted(&perm).unwrap();
            let zp = permute_rows(z.view(), &perm);
            let out = forward_equivariant(&p, &gp.laplacian(), zp.view()).unwrap();
            let expect = permute_rows(base.view(), &perm);
            assert!(out.iter().zip(&expect).all(|(a, b)| (a - b).abs() <= 1e-10));
            let inv_p = forward_invariant(&p, &gp.laplacian(), zp.view()).unwrap();
            assert!(inv.iter().zip(&inv_p).all(|(a, b)| (a - b).abs() <= 1e-12));
        }
    }
}

#[test]
fn single_node_invariant_output() {
    let l = SampledGraph::structural(1, &[]).unwrap().laplacian();
    let p = GcnParams::random(&[1, 3], 2, 1, ScalePolicy::Fixed(1.0), Activation::Abs).unwrap();
    let z = array![[0.8]];
    let eq = forward_equivariant(&p, &l, z.view()).unwrap();
    assert_eq!(forward_invariant(&p, &l, z.view()).unwrap(), eq.row(0));
}

#[test]
fn random_init_is_deterministic_with_expected_shapes() {
    let a = GcnParams::random(&[1, 8, 8, 4], 3, 42, ScalePolicy::Fixed(1.0), Activation::Relu).unwrap();
    assert_eq!(a, GcnParams::random(&[1, 8, 8, 4], 3, 42, ScalePolicy::Fixed(1.0), Activation::Relu).unwrap());
    assert_eq!(a.coefficients(0).dim(), (4, 8, 1));
    assert_eq!(a.coefficients(1).dim(), (4, 8, 8));
    assert_eq!(a.coefficients(2).dim(), (4, 4, 8));
    assert!(a.bias(1).iter().all(|&b| b == 0.0));
    assert_ne!(a, GcnParams::random(&[1, 8, 8, 4], 3, 43, ScalePolicy::Fixed(1.0), Activation::Relu).unwrap());
}

#[test]
fn unit_h2_policy_normalizes_each_layer() {
    let p = GcnParams::random(&[2, 6, 5], 3, 1, ScalePolicy::UnitH2, Activation::Tanh).unwrap();
    for l in 0..2 {
        let h2: f64 = (0..=3).map(|k| spectral_norm(p.filter(l, k))).sum();
        assert!((h2 - 1.0).abs() < 1e-8, "{h2}");
    }
}

#[test]
fn noiseless_input_reproduces_forward() {
    let g = sample_graph(&fixtures::model("uniform-line-gauss").unwrap(), 50, 1).unwrap();
    let l = g.laplacian();
    let p = GcnParams::random(&[1, 4], 1, 3, ScalePolicy::Fixed(1.0), Activation::Relu).unwrap();
    let a = forward_with_noise(&p, &l, g.signals.view(), 0.0, false, 9).unwrap();
    assert_eq!(a, forward_equivariant(&p, &l, g.signals.view()).unwrap());
    assert!(forward_with_noise(&p, &l, g.signals.view(), -1.0, false, 9).is_err());
}

#[test]
fn noise_has_requested_spread() {
    let n = 10_000;
    let l = SampledGraph::structural(n, &[]).unwrap().laplacian();
    let clean = Array2::ones((n, 1));
    let out = forward_with_noise(&GcnParams::identity(1), &l, clean.view(), 0.5, false, 3).unwrap();
    let dev: Vec<f64> = out.iter().map(|v| v - 1.0).collect();
    let mean = dev.iter().sum::<f64>() / n as f64;
    let sd = (dev.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    assert!((sd - 0.5).abs() <= 0.05, "{sd}");
}

#[test]
fn activation_contract_on_grid() {
    let grid: Vec<f64> = (0..10_000).map(|i| -10.0 + 20.0 * i as f64 / 9_999.0).collect();
    for act in Activation::ALL {
        for w in grid.windows(2) {
            assert!(act.apply(w[0]).abs() <= w[0].abs());
            assert!((act.apply(w[0]) - act.apply(w[1])).abs() <= (w[0] - w[1]).abs() * (1.0 + 1e-12));
        }
    }
    assert!("sigmoid".parse::<Activation>().is_err());
    assert_eq!("tanh".parse::<Activation>().unwrap(), Activation::Tanh);
}

#[test]
fn params_validate_shapes() {
    let ok = GcnParams::random(&[2, 3], 1, 1, ScalePolicy::Fixed(1.0), Activation::Relu).unwrap();
    assert!(ok.clone().with_biases(vec![Array1::zeros(2)]).is_err());
    assert!(ok.clone().with_readout(Array2::eye(2), Array1::zeros(2)).is_err());
    let bad = GcnParams::new(vec![1, 1], 0, vec![Array3::from_elem((1, 1, 1), f64::NAN)], vec![Array1::zeros(1)], Array2::eye(1), Array1::zeros(1), Activation::Abs);
    assert!(bad.is_err());
}

#[test]
fn text_format_round_trips_bit_exactly() {
    let p = GcnParams::random(&[2, 5, 3], 2, 11, ScalePolicy::Fixed(1.3), Activation::Abs)
        .unwrap()
        .with_biases(vec![Array1::from_elem(5, 1.0 / 3.0), Array1::from_elem(3, -std::f64::consts::PI)])
        .unwrap()
        .with_readout(random_matrix(3, 2, 4), array![1e-300, -2.5e17])
        .unwrap();
    let text = params_to_text(&p);
    assert!(text.starts_with(FORMAT_HEADER));
    let back = params_from_text(&text).unwrap();
    assert_eq!(back, p);
    assert_eq!(params_from_text(&params_to_text(&GcnParams::identity(3))).unwrap(), GcnParams::identity(3));
}

#[test]
fn text_format_reports_line_of_error() {
    let p = GcnParams::random(&[1, 2], 1, 1, ScalePolicy::Fixed(1.0), Activation::Relu).unwrap();
    let text = params_to_text(&p).replace("order 1", "order x");
    match params_from_text(&text) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    assert!(params_from_text("rgcn-params 2\n").is_err());
}
