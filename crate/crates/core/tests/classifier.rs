mod common;

use common::{dense_logits, dense_normalized, gradient_check, to_mat};
use ltrepair::classifier::{ClassifierParams, Model, Variant};
use ltrepair::rng::{stage_rng, Stage};
use ltrepair::{Dense, NormalizedAdjacency};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn gcn_gradient_matches_finite_differences() {
    for seed in 0..5 {
        let check = gradient_check(Variant::Gcn, 10, 3, seed);
        assert!(check.max_relative_error < 1e-4, "seed {seed}: {}", check.max_relative_error);
    }
}

#[test]
fn sgc_gradient_matches_finite_differences() {
    for seed in 0..5 {
        let check = gradient_check(Variant::Sgc, 10, 3, seed);
        assert!(check.max_relative_error < 1e-4, "seed {seed}: {}", check.max_relative_error);
    }
}

#[test]
fn forward_matches_dense_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 12;
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.random_bool(0.25)).collect();
    let x = Dense::<f64>::from_fn(n, 3, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0);
    let adj = NormalizedAdjacency::from_edges(n, &edges);
    let a = dense_normalized(n, &edges);
    for variant in [Variant::Gcn, Variant::Sgc] {
        let p = ClassifierParams::<f64>::init(variant, 3, 6, 4, 2, &mut stage_rng(3, Stage::Init));
        let (logits, _) = Model::new(&adj, x.clone(), &p).unwrap().forward(&p).unwrap();
        let want = dense_logits(&a, &to_mat(&x), &p);
        for i in 0..n {
            for j in 0..4 {
                assert!((logits.get(i, j) - want[i][j]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn predictions_are_permutation_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 15;
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).filter(|_| rng.random_bool(0.2)).collect();
    let x = Dense::<f64>::from_fn(n, 4, |_, _| rng.random_range(-1.0..1.0));
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    // node i of the original graph becomes node perm[i]
    let p_edges: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (perm[u], perm[v])).collect();
    let mut p_x = Dense::<f64>::zeros(n, 4);
    for i in 0..n {
        p_x.row_mut(perm[i]).copy_from_slice(x.row(i));
    }
    let adj = NormalizedAdjacency::from_edges(n, &edges);
    let mut canon = p_edges.clone();
    for e in &mut canon {
        if e.0 > e.1 {
            *e = (e.1, e.0);
        }
    }
    canon.sort();
    let p_adj = NormalizedAdjacency::from_edges(n, &canon);
    for variant in [Variant::Gcn, Variant::Sgc] {
        let p = ClassifierParams::<f64>::init(variant, 4, 8, 3, 2, &mut stage_rng(9, Stage::Init));
        let (a, _) = Model::new(&adj, x.clone(), &p).unwrap().forward(&p).unwrap();
        let (b, _) = Model::new(&p_adj, p_x.clone(), &p).unwrap().forward(&p).unwrap();
        for i in 0..n {
            for j in 0..3 {
                assert!((a.get(i, j) - b.get(perm[i], j)).abs() < 1e-12);
            }
        }
    }
}
