use serde::{Deserialize, Serialize};

use super::gibbs::{conditional_into, sample_categorical, Phase};
use super::transition::{ConfusionCounts, DirichletPrior, TransitionMatrix};
use crate::classifier::CategoricalDistribution;
use crate::error::{Error, Result};
use crate::graph::ClassId;
use crate::matrix::argmax;
use crate::rng::{stage_rng, Stage};

/// When the counts behind the dynamic `φ` are refreshed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateMode {
    /// Remove a node's pair before sampling it and add the new pair back
    /// immediately.
    #[default]
    Incremental,
    /// Sample a whole sweep against the counts from the start of the epoch,
    /// then rebuild.
    PerEpoch,
}

/// Whether post-warm-up sweeps switch to the count-based `φ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiMode {
    #[default]
    Dynamic,
    /// Keep `φ′` for every sweep.
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InferenceConfig {
    pub warmup_steps: usize,
    pub epochs: usize,
    pub update_mode: UpdateMode,
    pub phi_mode: PhiMode,
    pub seed: u64,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            warmup_steps: 20,
            epochs: 100,
            update_mode: UpdateMode::Incremental,
            phi_mode: PhiMode::Dynamic,
            seed: 0,
        }
    }
}

impl InferenceConfig {
    pub fn validate(&self) -> Result<()> {
        if self.warmup_steps == 0 || self.warmup_steps >= self.epochs {
            return Err(Error::InvalidConfig(format!(
                "need 0 < warmup_steps < epochs, got warmup_steps={} epochs={}",
                self.warmup_steps, self.epochs
            )));
        }
        Ok(())
    }

    pub fn sampling_epochs(&self) -> usize {
        self.epochs - self.warmup_steps
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InferenceResult {
    num_classes: usize,
    /// Row-wise argmax of `sample_counts`, ties to the smallest class.
    pub inferred_labels: Vec<ClassId>,
    /// Assignment after the final sweep.
    pub last_sample: Vec<ClassId>,
    /// `N_test × K`, row-major: post-warm-up visits per node and class.
    pub sample_counts: Vec<u32>,
    /// Row-normalized `C + α` after the final sweep.
    pub final_phi: TransitionMatrix,
    /// Accuracy of each sweep's assignment against the latent labels.
    pub trace: Vec<f64>,
}

impl InferenceResult {
    pub fn num_nodes(&self) -> usize {
        self.inferred_labels.len()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn sample_row(&self, n: usize) -> &[u32] {
        &self.sample_counts[n * self.num_classes..(n + 1) * self.num_classes]
    }
}

fn check_lengths(dist: &CategoricalDistribution, noisy: &[ClassId], latent: Option<&[ClassId]>) -> Result<()> {
    let n = dist.num_nodes();
    for (what, len) in [("noisy labels", Some(noisy.len())), ("latent labels", latent.map(<[_]>::len))] {
        if let Some(len) = len {
            if len != n {
                return Err(Error::ShapeMismatch {
                    context: what,
                    expected: n.to_string(),
                    found: len.to_string(),
                });
            }
        }
    }
    Ok(())
}

fn agreement(a: &[ClassId], b: &[ClassId]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / a.len() as f64
}

/// Collapsed Gibbs sampling over the test nodes.
///
/// Starts from the classifier's argmax labels, sweeps nodes in ascending
/// order for `epochs` epochs, using `phi_warm` for the first `warmup_steps`
/// and the leave-one-out counts afterwards, and tallies the samples drawn in
/// the post-warm-up sweeps.
pub fn run_inference(
    test_dist: &CategoricalDistribution,
    test_noisy: &[ClassId],
    phi_warm: &TransitionMatrix,
    prior: &DirichletPrior,
    config: &InferenceConfig,
    latent: Option<&[ClassId]>,
) -> Result<InferenceResult> {
    config.validate()?;
    check_lengths(test_dist, test_noisy, latent)?;
    let k = test_dist.num_classes();
    for (context, found) in [("warm-up transition size", phi_warm.num_classes()), ("prior length", prior.num_classes())] {
        if found != k {
            return Err(Error::ShapeMismatch {
                context,
                expected: k.to_string(),
                found: found.to_string(),
            });
        }
    }

    let n = test_dist.num_nodes();
    let mut rng = stage_rng(config.seed, Stage::Infer);
    let mut z = test_dist.argmax_labels();
    let mut counts = ConfusionCounts::from_assignments(&z, test_noisy, k)?;
    let mut sample_counts = vec![0u32; n * k];
    let mut trace = Vec::with_capacity(if latent.is_some() { config.epochs } else { 0 });
    let mut probs = vec![0.0; k];

    for epoch in 0..config.epochs {
        let dynamic = epoch >= config.warmup_steps && config.phi_mode == PhiMode::Dynamic;
        match config.update_mode {
            UpdateMode::Incremental => {
                for node in 0..n {
                    let y = test_noisy[node];
                    counts.remove(z[node], y)?;
                    let phase = if dynamic {
                        Phase::Dynamic { counts: &counts, prior }
                    } else {
                        Phase::Warmup(phi_warm)
                    };
                    conditional_into(test_dist.row(node), y, phase, &mut probs);
                    z[node] = sample_categorical(&probs, &mut rng);
                    counts.add(z[node], y);
                }
            }
            UpdateMode::PerEpoch => {
                let mut frozen = counts.clone();
                for node in 0..n {
                    let y = test_noisy[node];
                    if dynamic {
                        // frozen still holds this node's pair from the start of the sweep
                        frozen.remove(z[node], y)?;
                        conditional_into(test_dist.row(node), y, Phase::Dynamic { counts: &frozen, prior }, &mut probs);
                        frozen.add(z[node], y);
                    } else {
                        conditional_into(test_dist.row(node), y, Phase::Warmup(phi_warm), &mut probs);
                    }
                    z[node] = sample_categorical(&probs, &mut rng);
                }
                counts = ConfusionCounts::from_assignments(&z, test_noisy, k)?;
            }
        }
        debug_assert_eq!(counts.total(), n as u64);
        if epoch >= config.warmup_steps {
            for (node, &label) in z.iter().enumerate() {
                sample_counts[node * k + label] += 1;
            }
        }
        if let Some(latent) = latent {
            trace.push(agreement(&z, latent));
        }
    }

    let inferred_labels = sample_counts.chunks(k.max(1)).map(argmax).collect();
    Ok(InferenceResult {
        num_classes: k,
        inferred_labels,
        last_sample: z,
        sample_counts,
        final_phi: TransitionMatrix::from_counts(&counts, prior),
        trace,
    })
}
