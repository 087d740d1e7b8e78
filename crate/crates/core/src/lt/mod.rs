//! Label-transition inference.
//!
//! Each test node `n` has a classifier distribution `P̄(z_n)` and an observed
//! noisy label `y_n`. A `K×K` transition matrix `φ` (rows: inferred `z`,
//! columns: noisy `y`) with a Dirichlet(α) prior on every row links the two.
//! Integrating `φ` out gives the collapsed Gibbs conditional
//!
//! ```text
//! p(z_n = k | rest) ∝ P̄(k) · (α_{y_n} + C¬n[k][y_n]) / Σ_k' (α_k' + C¬n[k][k'])
//! ```
//!
//! where `C¬n` counts `(z, y)` pairs over the other test nodes. The first
//! `warmup_steps` sweeps use a fixed `φ′` estimated on the train graph
//! instead of the counts.

mod gibbs;
mod inference;
pub mod io;
mod transition;

pub use gibbs::{gibbs_step_distribution, sample_categorical, Phase};
pub use inference::{run_inference, InferenceConfig, InferenceResult, PhiMode, UpdateMode};
pub use transition::{counts_remove_add, warmup_transition, ConfusionCounts, DirichletPrior, TransitionMatrix};
