//! Graph storage, ingestion, splitting and synthetic generation.

mod adjacency;
pub mod io;
mod split;
mod synth;

pub use adjacency::NormalizedAdjacency;
pub use split::{split_nodes, NodeSplit};
pub use synth::{synth_sbm, SbmConfig};

use crate::error::{Error, Result};
use crate::matrix::Dense;

pub type ClassId = usize;

/// An undirected attributed graph with ground-truth and (optionally)
/// observed noisy labels.
///
/// Edges are kept canonical (`u < v`), sorted and deduplicated. Self-loops
/// never appear here; they are added by [`NormalizedAdjacency`].
#[derive(Clone, Debug, PartialEq)]
pub struct GraphBundle {
    num_classes: usize,
    edges: Vec<(usize, usize)>,
    features: Dense<f32>,
    latent_labels: Vec<ClassId>,
    noisy_labels: Option<Vec<ClassId>>,
}

impl GraphBundle {
    pub fn new(
        num_classes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        features: Dense<f32>,
        latent_labels: Vec<ClassId>,
        noisy_labels: Option<Vec<ClassId>>,
    ) -> Result<Self> {
        let n = features.rows();
        if num_classes == 0 {
            return Err(Error::InvalidConfig("num_classes must be positive".into()));
        }
        for (r, c) in (0..n).flat_map(|r| (0..features.cols()).map(move |c| (r, c))) {
            if !features.get(r, c).is_finite() {
                return Err(Error::NonFiniteFeature { node: r, column: c });
            }
        }
        check_labels(&latent_labels, n, num_classes)?;
        if let Some(noisy) = &noisy_labels {
            check_labels(noisy, n, num_classes)?;
        }
        let edges = canonical_edges(edges, n)?;
        Ok(Self {
            num_classes,
            edges,
            features,
            latent_labels,
            noisy_labels,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.features.rows()
    }

    pub fn num_features(&self) -> usize {
        self.features.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn features(&self) -> &Dense<f32> {
        &self.features
    }

    pub fn latent_labels(&self) -> &[ClassId] {
        &self.latent_labels
    }

    pub fn noisy_labels(&self) -> Option<&[ClassId]> {
        self.noisy_labels.as_deref()
    }

    pub fn with_noisy_labels(mut self, noisy: Vec<ClassId>) -> Result<Self> {
        check_labels(&noisy, self.num_nodes(), self.num_classes)?;
        self.noisy_labels = Some(noisy);
        Ok(self)
    }

    /// Same nodes, features and labels over a different edge set.
    pub fn with_edges(&self, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Ok(Self {
            num_classes: self.num_classes,
            edges: canonical_edges(edges, self.num_nodes())?,
            features: self.features.clone(),
            latent_labels: self.latent_labels.clone(),
            noisy_labels: self.noisy_labels.clone(),
        })
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes()];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Sorted neighbor lists.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes()];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.binary_search(&key).is_ok()
    }
}

fn check_labels(labels: &[ClassId], n: usize, k: usize) -> Result<()> {
    if labels.len() != n {
        return Err(Error::LabelCount {
            expected: n,
            found: labels.len(),
        });
    }
    if let Some((node, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= k) {
        return Err(Error::LabelOutOfRange {
            node,
            label,
            num_classes: k,
        });
    }
    Ok(())
}

/// Canonicalize to `u < v`, sort and deduplicate.
pub fn canonical_edges(
    edges: impl IntoIterator<Item = (usize, usize)>,
    n: usize,
) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (u, v) in edges {
        for index in [u, v] {
            if index >= n {
                return Err(Error::NodeOutOfRange {
                    index,
                    num_nodes: n,
                });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        out.push(if u < v { (u, v) } else { (v, u) });
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
