//! Reference implementations shared by the integration tests. They use
//! plain dense loops and do not call into the crate's numerical kernels.

#![allow(dead_code)]

use ltrepair::classifier::{ClassifierParams, Model, Targets, Variant};
use ltrepair::lt::ConfusionCounts;
use ltrepair::rng::{stage_rng, Stage};
use ltrepair::{Dense, NormalizedAdjacency};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<f64>>;

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; p]; n];
    for i in 0..n {
        for k in 0..m {
            for j in 0..p {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn to_mat(d: &Dense<f64>) -> Mat {
    (0..d.rows()).map(|i| d.row(i).to_vec()).collect()
}

/// `D̃^{-1/2}(A+I)D̃^{-1/2}` built from the edge list directly.
pub fn dense_normalized(n: usize, edges: &[(usize, usize)]) -> Mat {
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        a[i][i] = 1.0;
    }
    for &(u, v) in edges {
        a[u][v] = 1.0;
        a[v][u] = 1.0;
    }
    let deg: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    for i in 0..n {
        for j in 0..n {
            a[i][j] /= (deg[i] * deg[j]).sqrt();
        }
    }
    a
}

pub fn dense_logits(a: &Mat, x: &Mat, params: &ClassifierParams<f64>) -> Mat {
    match params {
        ClassifierParams::Gcn { w0, w1 } => {
            let mut h = matmul(a, &matmul(x, &to_mat(w0)));
            for row in &mut h {
                for v in row.iter_mut() {
                    *v = v.max(0.0);
                }
            }
            matmul(a, &matmul(&h, &to_mat(w1)))
        }
        ClassifierParams::Sgc { w, hops } => {
            let mut p = x.clone();
            for _ in 0..*hops {
                p = matmul(a, &p);
            }
            matmul(&p, &to_mat(w))
        }
    }
}

/// Mean cross-entropy over `nodes` via log-sum-exp.
pub fn dense_loss(logits: &Mat, labels: &[usize], nodes: &[usize]) -> f64 {
    let mut total = 0.0;
    for &n in nodes {
        let row = &logits[n];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        total += lse - row[labels[n]];
    }
    total / nodes.len() as f64
}

pub struct GradientCheck {
    pub max_relative_error: f64,
    pub entries: usize,
    /// Instances discarded because a hidden pre-activation sat on the ReLU kink.
    pub redraws: usize,
}

/// Smallest |pre-activation| of the GCN hidden layer (∞ for SGC).
fn kink_margin(a: &Mat, x: &Mat, params: &ClassifierParams<f64>) -> f64 {
    match params {
        ClassifierParams::Gcn { w0, .. } => matmul(a, &matmul(x, &to_mat(w0)))
            .iter()
            .flatten()
            .fold(f64::INFINITY, |m, v| m.min(v.abs())),
        ClassifierParams::Sgc { .. } => f64::INFINITY,
    }
}

/// Central differences against the analytic gradient on a random graph.
///
/// A weight step of `h` moves a pre-activation by at most `h·max|ÂX|`, so
/// instances with a pre-activation closer than `10h` to zero are redrawn:
/// the loss is not differentiable there and differences straddle the kink.
pub fn gradient_check(variant: Variant, n: usize, k: usize, seed: u64) -> GradientCheck {
    let h = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 4;
    let mut redraws = 0;
    loop {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if rng.random_bool(0.3) {
                    edges.push((u, v));
                }
            }
        }
        let x = Dense::<f64>::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let nodes: Vec<usize> = (0..n).filter(|i| i % 3 != 2).collect();
        let init_seed = rng.random();
        let params = ClassifierParams::<f64>::init(variant, d, 5, k, 2, &mut stage_rng(init_seed, Stage::Init));

        let a = dense_normalized(n, &edges);
        let xm = to_mat(&x);
        if kink_margin(&a, &xm, &params) < 10.0 * h {
            redraws += 1;
            continue;
        }

        let adj = NormalizedAdjacency::from_edges(n, &edges);
        let model = Model::new(&adj, x.clone(), &params).unwrap();
        let (_, analytic) = model.loss_and_gradient(&params, &Targets::mean(&nodes, &labels)).unwrap();
        let loss_at = |p: &ClassifierParams<f64>| dense_loss(&dense_logits(&a, &xm, p), &labels, &nodes);

        let mut worst = 0.0f64;
        let mut entries = 0;
        let shapes: Vec<(usize, usize)> = params.matrices().iter().map(|m| m.shape()).collect();
        for (mi, &(rows, cols)) in shapes.iter().enumerate() {
            for i in 0..rows {
                for j in 0..cols {
                    let mut plus = params.clone();
                    let mut minus = params.clone();
                    let base = params.matrices()[mi].get(i, j);
                    plus.matrices_mut()[mi].set(i, j, base + h);
                    minus.matrices_mut()[mi].set(i, j, base - h);
                    let numeric = (loss_at(&plus) - loss_at(&minus)) / (2.0 * h);
                    let exact = analytic.matrices()[mi].get(i, j);
                    let scale = numeric.abs().max(exact.abs()).max(1e-6);
                    worst = worst.max((numeric - exact).abs() / scale);
                    entries += 1;
                }
            }
        }
        return GradientCheck {
            max_relative_error: worst,
            entries,
            redraws,
        };
    }
}

/// Upper-tail p-value of Pearson's statistic for observed counts against
/// category probabilities (zero-probability categories must be unobserved).
pub fn chi_square_p(observed: &[u64], probs: &[f64]) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    let total: u64 = observed.iter().sum();
    let mut stat = 0.0;
    let mut dof = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        if p == 0.0 {
            assert_eq!(o, 0, "draw from a zero-probability category");
            continue;
        }
        let e = p * total as f64;
        stat += (o as f64 - e).powi(2) / e;
        dof += 1;
    }
    1.0 - ChiSquared::new((dof - 1) as f64).unwrap().cdf(stat)
}

/// Frozen 3-class confusion counts and the same counts as plain rows.
pub fn fixture_counts() -> (ConfusionCounts, Vec<Vec<u64>>) {
    let z = [0, 0, 0, 0, 1, 1, 1, 2, 2, 2, 2, 2, 1, 0];
    let y = [0, 0, 1, 2, 1, 1, 0, 2, 2, 2, 0, 1, 1, 0];
    let mut raw = vec![vec![0u64; 3]; 3];
    for (&a, &b) in z.iter().zip(&y) {
        raw[a][b] += 1;
    }
    (ConfusionCounts::from_assignments(&z, &y, 3).unwrap(), raw)
}

/// Collapsed Gibbs conditional written out from the definition.
/// `counts[k][k']` must already exclude the node being resampled.
pub fn dynamic_conditional(dist: &[f64], y: usize, counts: &[Vec<u64>], alpha: &[f64]) -> Vec<f64> {
    let k = dist.len();
    let w: Vec<f64> = (0..k)
        .map(|z| {
            let num = alpha[y] + counts[z][y] as f64;
            let den: f64 = (0..k).map(|j| alpha[j] + counts[z][j] as f64).sum();
            dist[z] * num / den
        })
        .collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

pub fn warmup_conditional(dist: &[f64], y: usize, phi: &[Vec<f64>]) -> Vec<f64> {
    let w: Vec<f64> = dist.iter().enumerate().map(|(z, p)| p * phi[z][y]).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}
