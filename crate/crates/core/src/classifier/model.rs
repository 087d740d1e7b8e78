//! Forward and backward passes for the two fixed architectures.
//!
//! ```text
//! GCN:  logits = Â · ReLU(Â · X · W0) · W1
//! SGC:  logits = Â^hops · X · W
//! ```
//!
//! Gradients are derived by hand for the mean cross-entropy over a set of
//! target nodes. `Â` is symmetric, so `Âᵀ·G = Â·G` throughout.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::distribution::softmax_rows;
use crate::error::{Error, Result};
use crate::graph::{ClassId, NormalizedAdjacency};
use crate::matrix::{Dense, Real};
use crate::rng::StageRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Gcn,
    Sgc,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Gcn => "gcn",
            Variant::Sgc => "sgc",
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Variant::Gcn => 0,
            Variant::Sgc => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Variant::Gcn),
            1 => Some(Variant::Sgc),
            _ => None,
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gcn" => Ok(Variant::Gcn),
            "sgc" => Ok(Variant::Sgc),
            other => Err(Error::InvalidConfig(format!("unknown classifier variant {other:?}"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Weights of a classifier. Also used as the container for gradients and
/// optimizer moments, which share its shape.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassifierParams<T = f32> {
    Gcn { w0: Dense<T>, w1: Dense<T> },
    Sgc { w: Dense<T>, hops: usize },
}

impl<T: Real> ClassifierParams<T> {
    /// Glorot-uniform initialization.
    pub fn init(variant: Variant, features: usize, hidden: usize, classes: usize, hops: usize, rng: &mut StageRng) -> Self {
        let mut glorot = |rows: usize, cols: usize| {
            let a = (6.0 / (rows + cols) as f64).sqrt();
            Dense::from_fn(rows, cols, |_, _| T::from(rng.random_range(-a..a)).unwrap())
        };
        match variant {
            Variant::Gcn => ClassifierParams::Gcn {
                w0: glorot(features, hidden),
                w1: glorot(hidden, classes),
            },
            Variant::Sgc => ClassifierParams::Sgc {
                w: glorot(features, classes),
                hops,
            },
        }
    }

    pub fn variant(&self) -> Variant {
        match self {
            ClassifierParams::Gcn { .. } => Variant::Gcn,
            ClassifierParams::Sgc { .. } => Variant::Sgc,
        }
    }

    pub fn hops(&self) -> usize {
        match self {
            ClassifierParams::Gcn { .. } => 0,
            ClassifierParams::Sgc { hops, .. } => *hops,
        }
    }

    pub fn num_features(&self) -> usize {
        self.matrices()[0].rows()
    }

    pub fn num_classes(&self) -> usize {
        self.matrices().last().unwrap().cols()
    }

    pub fn matrices(&self) -> Vec<&Dense<T>> {
        match self {
            ClassifierParams::Gcn { w0, w1 } => vec![w0, w1],
            ClassifierParams::Sgc { w, .. } => vec![w],
        }
    }

    pub fn matrices_mut(&mut self) -> Vec<&mut Dense<T>> {
        match self {
            ClassifierParams::Gcn { w0, w1 } => vec![w0, w1],
            ClassifierParams::Sgc { w, .. } => vec![w],
        }
    }

    /// Same shape, all zeros.
    pub fn zeros_like(&self) -> Self {
        match self {
            ClassifierParams::Gcn { w0, w1 } => ClassifierParams::Gcn {
                w0: Dense::zeros(w0.rows(), w0.cols()),
                w1: Dense::zeros(w1.rows(), w1.cols()),
            },
            ClassifierParams::Sgc { w, hops } => ClassifierParams::Sgc {
                w: Dense::zeros(w.rows(), w.cols()),
                hops: *hops,
            },
        }
    }

    pub fn cast<U: Real>(&self) -> ClassifierParams<U> {
        match self {
            ClassifierParams::Gcn { w0, w1 } => ClassifierParams::Gcn {
                w0: w0.cast(),
                w1: w1.cast(),
            },
            ClassifierParams::Sgc { w, hops } => ClassifierParams::Sgc {
                w: w.cast(),
                hops: *hops,
            },
        }
    }

    pub fn is_finite(&self) -> bool {
        self.matrices().iter().all(|m| m.is_finite())
    }

    pub fn squared_norm(&self) -> T {
        self.matrices().iter().map(|m| m.frobenius_sq()).sum()
    }

    /// Checks internal shape consistency against feature/class counts.
    pub fn check_shapes(&self, features: usize, classes: usize) -> Result<()> {
        let ok = match self {
            ClassifierParams::Gcn { w0, w1 } => {
                w0.rows() == features && w0.cols() == w1.rows() && w1.cols() == classes
            }
            ClassifierParams::Sgc { w, .. } => w.rows() == features && w.cols() == classes,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                context: "classifier params",
                expected: format!("{features} features, {classes} classes"),
                found: format!("{:?}", self.matrices().iter().map(|m| m.shape()).collect::<Vec<_>>()),
            })
        }
    }
}

/// Activations kept from a forward pass for the backward pass.
#[derive(Clone, Debug)]
pub enum ForwardCache<T> {
    Gcn { pre_activation: Dense<T>, hidden: Dense<T> },
    Sgc,
}

/// Nodes and labels that define the training objective
/// `(1/denominator) · Σ_{n ∈ nodes} −ln softmax(logits_n)[labels[n]]`.
#[derive(Clone, Debug)]
pub struct Targets<'a> {
    pub nodes: &'a [usize],
    /// Indexed by node id.
    pub labels: &'a [ClassId],
    pub denominator: usize,
}

impl<'a> Targets<'a> {
    /// Mean over `nodes`.
    pub fn mean(nodes: &'a [usize], labels: &'a [ClassId]) -> Self {
        Self {
            nodes,
            labels,
            denominator: nodes.len().max(1),
        }
    }
}

fn require_variant<T: Real>(params: &ClassifierParams<T>, want: Variant) -> Result<()> {
    if params.variant() == want {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            context: "classifier variant",
            expected: want.name().into(),
            found: params.variant().name().into(),
        })
    }
}

/// `Â · ReLU(Â · X · W0) · W1`.
pub fn gcn_forward<T: Real>(adj: &NormalizedAdjacency, x: &Dense<T>, params: &ClassifierParams<T>) -> Result<Dense<T>> {
    require_variant(params, Variant::Gcn)?;
    Model::new(adj, x.clone(), params)?.forward(params).map(|(l, _)| l)
}

/// `Â^hops · X · W`.
pub fn sgc_forward<T: Real>(adj: &NormalizedAdjacency, x: &Dense<T>, params: &ClassifierParams<T>) -> Result<Dense<T>> {
    require_variant(params, Variant::Sgc)?;
    Model::new(adj, x.clone(), params)?.forward(params).map(|(l, _)| l)
}

/// A graph and feature matrix prepared for repeated forward/backward passes.
///
/// SGC's `Â^hops·X` and the transposes used by the weight gradients are
/// computed once here.
pub struct Model<'a, T> {
    adj: &'a NormalizedAdjacency,
    variant: Variant,
    /// GCN: X. SGC: Â^hops·X.
    input: Dense<T>,
    input_t: Dense<T>,
}

impl<'a, T: Real> Model<'a, T> {
    pub fn new(adj: &'a NormalizedAdjacency, x: Dense<T>, params: &ClassifierParams<T>) -> Result<Self> {
        if x.rows() != adj.num_nodes() {
            return Err(Error::ShapeMismatch {
                context: "feature rows vs adjacency",
                expected: adj.num_nodes().to_string(),
                found: x.rows().to_string(),
            });
        }
        if x.cols() != params.num_features() {
            return Err(Error::ShapeMismatch {
                context: "feature columns vs weights",
                expected: params.num_features().to_string(),
                found: x.cols().to_string(),
            });
        }
        let input = match params {
            ClassifierParams::Gcn { .. } => x,
            ClassifierParams::Sgc { hops, .. } => adj.propagate(&x, *hops)?,
        };
        let input_t = input.transpose();
        Ok(Self {
            adj,
            variant: params.variant(),
            input,
            input_t,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn forward(&self, params: &ClassifierParams<T>) -> Result<(Dense<T>, ForwardCache<T>)> {
        require_variant(params, self.variant)?;
        match params {
            ClassifierParams::Gcn { w0, w1 } => {
                let pre_activation = self.adj.spmm(&self.input.matmul(w0)?)?;
                let hidden = pre_activation.map(|v| v.max(T::zero()));
                let logits = self.adj.spmm(&hidden.matmul(w1)?)?;
                Ok((logits, ForwardCache::Gcn { pre_activation, hidden }))
            }
            ClassifierParams::Sgc { w, .. } => Ok((self.input.matmul(w)?, ForwardCache::Sgc)),
        }
    }

    /// `∂loss/∂logits` for the mean cross-entropy over the targets.
    pub fn logit_gradient(&self, logits: &Dense<T>, targets: &Targets<'_>) -> Result<Dense<T>> {
        let probs = softmax_rows(logits)?;
        let mut g = Dense::<T>::zeros(logits.rows(), logits.cols());
        let scale = 1.0 / targets.denominator as f64;
        for &n in targets.nodes {
            let y = targets.labels[n];
            let row = g.row_mut(n);
            for (k, (o, &p)) in row.iter_mut().zip(probs.row(n)).enumerate() {
                let d = (p - if k == y { 1.0 } else { 0.0 }) * scale;
                *o = *o + T::from(d).unwrap();
            }
        }
        Ok(g)
    }

    pub fn backward(
        &self,
        params: &ClassifierParams<T>,
        logits: &Dense<T>,
        cache: &ForwardCache<T>,
        targets: &Targets<'_>,
    ) -> Result<ClassifierParams<T>> {
        let g = self.logit_gradient(logits, targets)?;
        match (params, cache) {
            (ClassifierParams::Gcn { w1, .. }, ForwardCache::Gcn { pre_activation, hidden }) => {
                let ag = self.adj.spmm(&g)?;
                let dw1 = hidden.t_matmul(&ag)?;
                let mut dz = ag.matmul_t(w1)?;
                for (d, &z) in dz.as_mut_slice().iter_mut().zip(pre_activation.as_slice()) {
                    if z <= T::zero() {
                        *d = T::zero();
                    }
                }
                let dw0 = self.input_t.matmul(&self.adj.spmm(&dz)?)?;
                Ok(ClassifierParams::Gcn { w0: dw0, w1: dw1 })
            }
            (ClassifierParams::Sgc { hops, .. }, ForwardCache::Sgc) => Ok(ClassifierParams::Sgc {
                w: self.input_t.matmul(&g)?,
                hops: *hops,
            }),
            _ => Err(Error::InvalidConfig("forward cache does not match classifier variant".into())),
        }
    }

    /// Loss and gradient in one call.
    pub fn loss_and_gradient(&self, params: &ClassifierParams<T>, targets: &Targets<'_>) -> Result<(f64, ClassifierParams<T>)> {
        let (logits, cache) = self.forward(params)?;
        let probs = softmax_rows(&logits)?;
        let loss = targets
            .nodes
            .iter()
            .map(|&n| -probs.row(n)[targets.labels[n]].max(super::PROB_FLOOR).ln())
            .sum::<f64>()
            / targets.denominator as f64;
        let grads = self.backward(params, &logits, &cache, targets)?;
        Ok((loss, grads))
    }
}
