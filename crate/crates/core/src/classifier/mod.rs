//! Two-layer GCN and SGC node classifiers trained full-batch with Adam.

mod adam;
pub mod checkpoint;
mod distribution;
mod model;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use distribution::{cross_entropy, cross_entropy_on, softmax_rows, CategoricalDistribution, PROB_FLOOR};
pub use model::{gcn_forward, sgc_forward, ClassifierParams, ForwardCache, Model, Targets, Variant};
pub use train::{predict, train, TrainConfig, TrainOutcome};
