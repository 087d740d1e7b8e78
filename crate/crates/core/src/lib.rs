//! Graph convolutional node classifiers trained on noisy labels, a
//! non-malicious perturbation simulator, and Bayesian label-transition
//! inference that repairs the classifier's predictions after the fact.
//!
//! The crate is organized bottom-up:
//!
//! - [`graph`]: bundles, normalized adjacency, splits, synthetic graphs, file IO
//! - [`classifier`]: GCN and SGC with hand-derived gradients and Adam
//! - [`perturb`]: label-noise injection and perturbator simulation
//! - [`lt`]: warm-up transition matrix, collapsed Gibbs step, inference loop
//! - [`eval`]: metrics, reports and the end-to-end experiment pipeline

pub mod classifier;
pub mod error;
pub mod eval;
pub mod graph;
pub mod lt;
pub mod matrix;
pub mod perturb;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{
    split_nodes, synth_sbm, ClassId, GraphBundle, NodeSplit, NormalizedAdjacency, SbmConfig,
};
pub use matrix::{Dense, Real};
