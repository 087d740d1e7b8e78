use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::distribution::{softmax_rows, CategoricalDistribution};
use super::model::{ClassifierParams, Model, Targets, Variant};
use crate::error::{Error, Result};
use crate::graph::{ClassId, GraphBundle, NodeSplit, NormalizedAdjacency};
use crate::rng::{stage_rng, Stage};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub hidden: usize,
    /// Propagation depth for SGC; ignored by GCN.
    pub hops: usize,
    pub adam: AdamConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 1e-3,
            hidden: 200,
            hops: 2,
            adam: AdamConfig::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.hidden == 0 {
            return Err(Error::InvalidConfig("hidden must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: ClassifierParams<f32>,
    /// Softmax output for every node of the training graph.
    pub distribution: CategoricalDistribution,
    /// Training loss before each update.
    pub loss_history: Vec<f64>,
    /// Accuracy against the noisy labels on train and validation nodes.
    pub train_accuracy: f64,
    pub val_accuracy: f64,
}

fn agreement(pred: &[ClassId], labels: &[ClassId], nodes: &[usize]) -> f64 {
    if nodes.is_empty() {
        return 0.0;
    }
    let hits = nodes.iter().filter(|&&n| pred[n] == labels[n]).count();
    hits as f64 / nodes.len() as f64
}

/// Full-batch training on the noisy labels of the train nodes for a fixed
/// number of epochs.
pub fn train(
    bundle: &GraphBundle,
    split: &NodeSplit,
    noisy: &[ClassId],
    variant: Variant,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    split.validate(bundle.num_nodes())?;
    if noisy.len() != bundle.num_nodes() {
        return Err(Error::LabelCount {
            expected: bundle.num_nodes(),
            found: noisy.len(),
        });
    }
    if split.train.is_empty() {
        return Err(Error::InvalidConfig("train split is empty".into()));
    }

    let adj = NormalizedAdjacency::from_bundle(bundle);
    let mut rng = stage_rng(cfg.seed, Stage::Init);
    let mut params = ClassifierParams::<f32>::init(
        variant,
        bundle.num_features(),
        cfg.hidden,
        bundle.num_classes(),
        cfg.hops,
        &mut rng,
    );
    let model = Model::new(&adj, bundle.features().clone(), &params)?;
    let targets = Targets::mean(&split.train, noisy);
    let mut state = AdamState::new(&params);
    let mut loss_history = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        let (loss, grads) = model.loss_and_gradient(&params, &targets)?;
        if !loss.is_finite() || !grads.is_finite() {
            return Err(Error::NonFinite("training gradient"));
        }
        loss_history.push(loss);
        adam_step(&mut params, &grads, &mut state, cfg.learning_rate, &cfg.adam);
    }

    let (logits, _) = model.forward(&params)?;
    let distribution = softmax_rows(&logits)?;
    let pred = distribution.argmax_labels();
    Ok(TrainOutcome {
        train_accuracy: agreement(&pred, noisy, &split.train),
        val_accuracy: agreement(&pred, noisy, &split.val),
        params,
        distribution,
        loss_history,
    })
}

/// Class distribution for every node of `bundle` under fixed weights.
pub fn predict(params: &ClassifierParams<f32>, bundle: &GraphBundle) -> Result<CategoricalDistribution> {
    params.check_shapes(bundle.num_features(), bundle.num_classes())?;
    let adj = NormalizedAdjacency::from_bundle(bundle);
    let model = Model::new(&adj, bundle.features().clone(), params)?;
    let (logits, _) = model.forward(params)?;
    softmax_rows(&logits)
}
