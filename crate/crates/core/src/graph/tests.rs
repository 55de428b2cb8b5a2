use std::sync::Arc;

use ndarray::{array, Array2};

use super::*;
use crate::linalg::symmetric_eigen;
use crate::model::{fixtures, Kernel, LatentSpace, NodeDistribution, SignalFunction, Sparsity};
use crate::rng::unit_uniform;

fn line_model(kernel: Kernel) -> RandomGraphModel {
    RandomGraphModel::new(
        LatentSpace::new(1, 1, "unit interval").unwrap(),
        NodeDistribution::unit_cube(1),
        kernel,
        SignalFunction::ones(1),
        Sparsity::Constant(1.0),
    )
    .unwrap()
}

fn triangle() -> SampledGraph {
    SampledGraph::structural(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
}

fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    (0..n).map(|i| unit_uniform(seed, 9, i as u64, 0) - 0.5).collect()
}

#[test]
fn complete_kernel_gives_complete_graph() {
    let g = sample_graph(&fixtures::model("complete").unwrap(), 50, 1).unwrap();
    assert_eq!(g.edge_count(), 50 * 49 / 2);
}

#[test]
fn zero_kernel_gives_empty_graph() {
    let g = sample_graph(&line_model(Kernel::constant(0.0).unwrap()), 50, 1).unwrap();
    assert_eq!(g.edge_count(), 0);
    assert!(degree_input_signal(&g, 1.0).unwrap().iter().all(|&v| v == 0.0));
}

#[test]
fn half_kernel_edge_count_is_binomial() {
    let n: f64 = 2000.0;
    let g = sample_graph(&fixtures::model("half-constant").unwrap(), 2000, 3).unwrap();
    let mean = n * (n - 1.0) / 4.0;
    let sd = (n * (n - 1.0) / 8.0).sqrt();
    assert!((g.edge_count() as f64 - mean).abs() <= 3.0 * sd, "{} vs {mean}", g.edge_count());
}

#[test]
fn probabilities_above_one_are_rejected() {
    let k = Kernel::custom(Arc::new(|_: &[f64], _: &[f64]| 1.2), None, 1.0, 1.0, true).unwrap();
    assert!(matches!(sample_graph(&line_model(k), 10, 1), Err(Error::Model(_))));
}

#[test]
fn sampling_needs_two_nodes() {
    assert!(sample_graph(&fixtures::model("complete").unwrap(), 1, 1).is_err());
}

#[test]
fn adjacency_is_symmetric_without_loops() {
    let g = sample_graph(&fixtures::model("uniform-line-gauss").unwrap(), 300, 5).unwrap();
    let a = g.dense_adjacency();
    assert_eq!(a, a.t());
    assert!((0..300).all(|i| a[[i, i]] == 0.0));
    // noiseless signals are f at the latents
    let f = fixtures::model("uniform-line-gauss").unwrap().signal;
    assert_eq!(g.signals, f.evaluate_rows(g.latents.view()));
}

#[test]
fn triangle_laplacian_is_half_adjacency() {
    let g = triangle();
    let l = g.laplacian();
    let dense = l.dense_mirror().unwrap();
    assert_eq!(dense, &(g.dense_adjacency() / 2.0));
    let (vals, _) = symmetric_eigen(dense.view());
    for (v, e) in vals.iter().zip([-0.5, -0.5, 1.0]) {
        assert!((v - e).abs() < 1e-14, "{vals:?}");
    }
}

#[test]
fn isolated_node_has_empty_row_and_column() {
    let g = SampledGraph::structural(4, &[(0, 1), (1, 2)]).unwrap();
    let l = g.laplacian();
    let d = l.to_dense();
    assert!(d.row(3).iter().all(|&v| v == 0.0) && d.column(3).iter().all(|&v| v == 0.0));
    assert_eq!(l.zero_degree_mask(), &[false, false, false, true]);
    assert_eq!(l.isolated_count(), 1);
}

#[test]
fn star_top_eigenvector_is_sqrt_degree() {
    let g = SampledGraph::structural(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
    let l = g.laplacian();
    let (vals, vecs) = symmetric_eigen(l.dense_mirror().unwrap().view());
    assert!((vals[3] - 1.0).abs() < 1e-14);
    let expect: Vec<f64> = l.degrees().iter().map(|d| d.sqrt()).collect();
    let norm = expect.iter().map(|v| v * v).sum::<f64>().sqrt();
    let top = vecs.column(3);
    let sign = top[0].signum();
    for (a, b) in top.iter().zip(&expect) {
        assert!((sign * a - b / norm).abs() < 1e-12);
    }
}

#[test]
fn matvec_examples() {
    let g = sample_graph(&fixtures::model("half-constant").unwrap(), 100, 2).unwrap();
    let l = g.laplacian();
    let mut out = vec![1.0; 100];
    l.matvec(&vec![0.0; 100], &mut out).unwrap();
    assert!(out.iter().all(|&v| v == 0.0));

    let v: Vec<f64> = l.degrees().iter().map(|d| d.sqrt()).collect();
    assert_eq!(l.isolated_count(), 0);
    l.matvec(&v, &mut out).unwrap();
    for (a, b) in out.iter().zip(&v) {
        assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
    }

    let k3 = triangle().laplacian();
    let v = random_vec(3, 4);
    let mut out = vec![0.0; 3];
    k3.matvec(&v, &mut out).unwrap();
    let oracle = (triangle().dense_adjacency() / 2.0).dot(&ndarray::Array1::from(v));
    for (a, b) in out.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-13);
    }
    assert!(matches!(k3.matvec(&[1.0; 4], &mut [0.0; 4]), Err(Error::Shape { .. })));
    assert!(k3.apply(Array2::zeros((4, 2)).view()).is_err());
}

#[test]
fn matrix_apply_matches_dense_product() {
    let g = sample_graph(&fixtures::model("uniform-line-gauss").unwrap(), 200, 7).unwrap();
    let l = g.laplacian();
    let v = Array2::from_shape_fn((200, 3), |(i, j)| unit_uniform(1, 2, i as u64, j as u64));
    let got = l.apply(v.view()).unwrap();
    let expect = l.to_dense().dot(&v);
    assert!(got.iter().zip(&expect).all(|(a, b)| (a - b).abs() < 1e-13));
}

#[test]
fn laplacian_is_symmetric_and_contractive() {
    for (name, n) in [("uniform-line-gauss", 400), ("epsilon-line", 300), ("sbm-constant-degree", 300)] {
        let g = sample_graph(&fixtures::model(name).unwrap(), n, 11).unwrap();
        let l = g.laplacian();
        assert!(l.spectral_radius(Default::default()) <= 1.0 + 1e-10, "{name}");
        let (u, v) = (random_vec(n, 1), random_vec(n, 2));
        let (mut lu, mut lv) = (vec![0.0; n], vec![0.0; n]);
        l.matvec(&u, &mut lu).unwrap();
        l.matvec(&v, &mut lv).unwrap();
        let a: f64 = lu.iter().zip(&v).map(|(x, y)| x * y).sum();
        let b: f64 = u.iter().zip(&lv).map(|(x, y)| x * y).sum();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300), "{name}: {a} {b}");
    }
}

#[test]
fn degree_signal_examples() {
    let g = sample_graph(&fixtures::model("complete").unwrap(), 40, 1).unwrap();
    let s = degree_input_signal(&g, 1.0).unwrap();
    assert!(s.iter().all(|&v| v == 39.0 / 40.0));

    let n = 2000;
    let g = sample_graph(&fixtures::model("half-constant").unwrap(), n, 1).unwrap();
    let s = degree_input_signal(&g, 1.0).unwrap();
    let bound = 5.0 * ((n as f64).ln() / n as f64).sqrt();
    assert!(s.iter().all(|&v| (v - 0.5).abs() <= bound));
    assert!(degree_input_signal(&g, 0.0).is_err());
}

#[test]
fn edge_redraw_keeps_latents() {
    let m = fixtures::model("uniform-line-gauss").unwrap();
    let a = sample_graph_with_seeds(&m, 200, 5, 1).unwrap();
    let b = sample_graph_with_seeds(&m, 200, 5, 2).unwrap();
    assert!(a.latents.iter().zip(&b.latents).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_ne!(a.edges(), b.edges());
}

#[test]
fn relabeled_latents_give_relabeled_graph() {
    let m = fixtures::model("uniform-line-gauss").unwrap();
    let g = sample_graph(&m, 120, 4).unwrap();
    let perm: Vec<usize> = {
        let mut p: Vec<usize> = (0..120).collect();
        p.sort_by_key(|&i| crate::rng::mix(8, 0, i as u64, 0));
        p
    };
    let keys: Vec<u64> = perm.iter().map(|&p| p as u64).collect();
    let relabeled = sample_edges(&m, permute_rows(g.latents.view(), &perm), g.edge_seed, Some(&keys)).unwrap();
    let back = relabeled.permuted(&inverse_permutation(&perm, 120).unwrap()).unwrap();
    assert_eq!(back.edges(), g.edges());
    assert_eq!(back.latents, g.latents);
}

#[test]
fn mean_degree_matches_degree_function() {
    let m = fixtures::model("uniform-line-gauss").unwrap();
    let n = 1500;
    let g = sample_graph(&m, n, 13).unwrap();
    let mean_degree = 2.0 * g.edge_count() as f64 / n as f64;
    let xs = m.distribution.sample(400, 99);
    let degs: Vec<f64> = xs.rows().into_iter().map(|x| m.estimate_degree_function(x.as_slice().unwrap(), 4000, 3).value).collect();
    let est = crate::model::mean_with_error(&degs);
    let var_d = est.std_error.powi(2) * degs.len() as f64;
    let nf = n as f64;
    let expect = (nf - 1.0) * est.value;
    // latent fluctuation of the U-statistic plus Bernoulli noise plus the error of the reference mean
    let sd = ((nf - 1.0).powi(2) * 4.0 * var_d / nf + 2.0 * expect / nf + (nf * est.std_error).powi(2)).sqrt();
    assert!((mean_degree - expect).abs() <= 3.0 * sd, "{mean_degree} vs {expect} (sd {sd})");
}

#[test]
fn from_edges_validates() {
    assert!(SampledGraph::structural(3, &[(0, 0)]).is_err());
    assert!(SampledGraph::structural(3, &[(0, 3)]).is_err());
    let g = SampledGraph::structural(3, &[(1, 0), (0, 1)]).unwrap();
    assert_eq!(g.edges(), &[(0, 1)]);
    assert!(inverse_permutation(&[0, 0, 1], 3).is_err());
}

#[test]
fn files_round_trip_bit_exactly() {
    let m = fixtures::model("bumped-surface-gauss").unwrap();
    let g = sample_graph(&m, 150, 21).unwrap();
    let g = g.with_signals(g.latents.mapv(|v| v.exp() / 3.0)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("g");
    g.save(&stem).unwrap();
    let back = SampledGraph::load(&stem, g.alpha).unwrap();
    assert_eq!(back.edges(), g.edges());
    assert!(back.latents.iter().zip(&g.latents).all(|(a, b)| a.to_bits() == b.to_bits()));
    assert!(back.signals.iter().zip(&g.signals).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn edge_list_parse_errors_name_the_line() {
    let text = "3 2\n0 1\n1 x\n";
    match read_edge_list(text.as_bytes()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    assert!(read_edge_list("3 2\n0 1\n".as_bytes()).is_err());
    let (n, e) = read_edge_list("2 1\n0 1\n".as_bytes()).unwrap();
    assert_eq!((n, e), (2, vec![(0, 1)]));
}

#[test]
fn dense_laplacian_of_weights() {
    let w = array![[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
    let l = dense_normalized_laplacian(w.view());
    assert_eq!(l, w);
}
