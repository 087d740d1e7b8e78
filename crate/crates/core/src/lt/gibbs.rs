use rand::Rng;

use super::transition::{ConfusionCounts, DirichletPrior, TransitionMatrix};
use crate::graph::ClassId;

/// Source of the transition factor in the Gibbs conditional.
#[derive(Clone, Copy, Debug)]
pub enum Phase<'a> {
    /// `φ′[k][y]` from the train graph.
    Warmup(&'a TransitionMatrix),
    /// Counts with the current node already removed.
    Dynamic {
        counts: &'a ConfusionCounts,
        prior: &'a DirichletPrior,
    },
}

impl Phase<'_> {
    fn factor(&self, k: ClassId, y: ClassId) -> f64 {
        match self {
            Phase::Warmup(phi) => phi.get(k, y),
            Phase::Dynamic { counts, prior } => {
                (prior.alpha()[y] + counts.get(k, y) as f64) / (prior.sum() + counts.row_total(k) as f64)
            }
        }
    }
}

/// Writes the normalized conditional for one node into `out`.
///
/// `node_dist` is expected to be a probability vector. Factors are scaled by
/// their maximum; when they are all equal the conditional is `node_dist`
/// itself and is copied without renormalizing.
pub(crate) fn conditional_into(node_dist: &[f64], y: ClassId, phase: Phase<'_>, out: &mut [f64]) {
    let mut max = 0.0f64;
    for (k, o) in out.iter_mut().enumerate() {
        *o = phase.factor(k, y);
        max = max.max(*o);
    }
    if out.iter().all(|&f| f == max) {
        out.copy_from_slice(node_dist);
        return;
    }
    let mut total = 0.0;
    for (o, &p) in out.iter_mut().zip(node_dist) {
        *o = p * (*o / max);
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// `p(z_n = k) ∝ node_dist[k] · factor(k, y_n)`, normalized.
pub fn gibbs_step_distribution(node_dist: &[f64], y: ClassId, phase: Phase<'_>) -> Vec<f64> {
    let mut out = vec![0.0; node_dist.len()];
    conditional_into(node_dist, y, phase, &mut out);
    out
}

/// Inverse-CDF draw from a probability vector; mass lost to rounding goes
/// to the last class with positive probability.
pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> ClassId {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (k, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = k;
            if u < acc {
                return k;
            }
        }
    }
    last
}
