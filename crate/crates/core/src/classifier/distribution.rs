use crate::error::{Error, Result};
use crate::graph::ClassId;
use crate::matrix::{argmax, Dense, Real};

/// Lower clamp applied to probabilities before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

/// Row-stochastic `N × K` matrix of per-node class probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct CategoricalDistribution {
    probs: Dense<f64>,
}

impl CategoricalDistribution {
    /// Wraps an existing matrix after checking it is row-stochastic.
    pub fn from_probs(probs: Dense<f64>) -> Result<Self> {
        for i in 0..probs.rows() {
            let row = probs.row(i);
            if row.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
                return Err(Error::NonFinite("categorical distribution"));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-6 {
                return Err(Error::InvalidConfig(format!("row {i} sums to {s}, not 1")));
            }
        }
        Ok(Self { probs })
    }

    pub fn num_nodes(&self) -> usize {
        self.probs.rows()
    }

    pub fn num_classes(&self) -> usize {
        self.probs.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.probs.row(i)
    }

    pub fn as_matrix(&self) -> &Dense<f64> {
        &self.probs
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            probs: self.probs.select_rows(idx),
        }
    }

    /// Most probable class per node (ties to the smallest id).
    pub fn argmax_labels(&self) -> Vec<ClassId> {
        (0..self.num_nodes()).map(|i| argmax(self.row(i))).collect()
    }
}

/// Row-wise softmax with max subtraction, evaluated in 64-bit.
pub fn softmax_rows<T: Real>(logits: &Dense<T>) -> Result<CategoricalDistribution> {
    if !logits.is_finite() {
        return Err(Error::NonFinite("logits"));
    }
    let mut probs = Dense::<f64>::zeros(logits.rows(), logits.cols());
    for i in 0..logits.rows() {
        let row: Vec<f64> = logits.row(i).iter().map(|v| v.to_f64().unwrap()).collect();
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let out = probs.row_mut(i);
        let mut total = 0.0;
        for (o, v) in out.iter_mut().zip(&row) {
            *o = (v - max).exp();
            total += *o;
        }
        for o in out.iter_mut() {
            *o /= total;
        }
    }
    Ok(CategoricalDistribution { probs })
}

/// Mean negative log-likelihood of `labels` over all rows.
pub fn cross_entropy(dist: &CategoricalDistribution, labels: &[ClassId]) -> f64 {
    let nodes: Vec<usize> = (0..dist.num_nodes()).collect();
    cross_entropy_on(dist, labels, &nodes)
}

/// Mean negative log-likelihood over the listed nodes; `labels` is indexed by
/// node id.
pub fn cross_entropy_on(dist: &CategoricalDistribution, labels: &[ClassId], nodes: &[usize]) -> f64 {
    if nodes.is_empty() {
        return 0.0;
    }
    let total: f64 = nodes
        .iter()
        .map(|&n| -dist.row(n)[labels[n]].max(PROB_FLOOR).ln())
        .sum();
    total / nodes.len() as f64
}
