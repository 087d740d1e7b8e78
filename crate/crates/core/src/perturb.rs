//! Label-noise injection and non-malicious perturbator simulation.

use std::collections::HashSet;
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::io::{write_edges, write_json, write_labels, NOISY_LABELS_FILE};
use crate::graph::{ClassId, GraphBundle, NodeSplit};
use crate::rng::{stage_rng, Stage};

pub const PERTURBED_EDGES_FILE: &str = "perturbed_edges.txt";
pub const NOISE_MANIFEST_FILE: &str = "noise.json";
pub const PERTURB_MANIFEST_FILE: &str = "perturb.json";

// Guards floor/ceil against products like 0.29·100 = 28.999999999999996.
const ROUNDING_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub nr: f64,
    pub seed: u64,
}

impl NoiseSpec {
    /// `⌊nr·n⌋`.
    pub fn flip_count(&self, n: usize) -> usize {
        ((self.nr * n as f64 + ROUNDING_SLACK).floor() as usize).min(n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseManifest {
    pub spec: NoiseSpec,
    pub num_classes: usize,
    pub flipped: usize,
}

/// Replaces the labels of exactly `⌊nr·N⌋` uniformly chosen nodes with a
/// uniformly chosen different class.
///
/// For a fixed seed the flipped set at a smaller `nr` is a prefix of the
/// set at a larger one, and a node that is flipped always receives the
/// same replacement.
pub fn inject_label_noise(latent: &[ClassId], k: usize, spec: &NoiseSpec) -> Result<Vec<ClassId>> {
    if !(0.0..=1.0).contains(&spec.nr) {
        return Err(Error::InvalidConfig(format!("noise ratio must be in [0, 1], got {}", spec.nr)));
    }
    if let Some((node, &label)) = latent.iter().enumerate().find(|(_, &l)| l >= k) {
        return Err(Error::LabelOutOfRange {
            node,
            label,
            num_classes: k,
        });
    }
    let flips = spec.flip_count(latent.len());
    if flips > 0 && k < 2 {
        return Err(Error::InvalidConfig("label noise needs at least two classes".into()));
    }
    let mut rng = stage_rng(spec.seed, Stage::Noise);
    let mut order: Vec<usize> = (0..latent.len()).collect();
    order.shuffle(&mut rng);
    let mut noisy = latent.to_vec();
    for (rank, &node) in order.iter().enumerate() {
        // drawn for every node so replacements do not depend on nr
        let offset = if k >= 2 { rng.random_range(1..k) } else { 0 };
        if rank < flips {
            noisy[node] = (latent[node] + offset) % k;
        }
    }
    Ok(noisy)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbSpec {
    pub perturbator_fraction: f64,
    pub budget: usize,
    pub seed: u64,
}

impl Default for PerturbSpec {
    fn default() -> Self {
        Self {
            perturbator_fraction: 0.01,
            budget: 100,
            seed: 0,
        }
    }
}

impl PerturbSpec {
    fn validate(&self) -> Result<()> {
        if !(self.perturbator_fraction > 0.0 && self.perturbator_fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "perturbator fraction must be in (0, 1], got {}",
                self.perturbator_fraction
            )));
        }
        if self.budget == 0 {
            return Err(Error::InvalidConfig("perturbation budget must be at least 1".into()));
        }
        Ok(())
    }

    /// `⌈fraction·pool⌉`.
    pub fn perturbator_count(&self, pool: usize) -> usize {
        ((self.perturbator_fraction * pool as f64 - ROUNDING_SLACK).ceil().max(0.0) as usize).min(pool)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Perturbation {
    pub bundle: GraphBundle,
    /// Sorted ascending.
    pub perturbators: Vec<usize>,
    /// Canonical `(u, v)` pairs, sorted.
    pub added_edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbManifest {
    pub spec: PerturbSpec,
    pub perturbators: Vec<usize>,
    pub added_edges: usize,
}

impl Perturbation {
    pub fn manifest(&self, spec: &PerturbSpec) -> PerturbManifest {
        PerturbManifest {
            spec: *spec,
            perturbators: self.perturbators.clone(),
            added_edges: self.added_edges.len(),
        }
    }
}

/// Picks `⌈fraction·|val∪test|⌉` perturbators from the validation and test
/// nodes and connects each to exactly `budget` new victims.
///
/// Victims are drawn uniformly from the validation and test nodes that are
/// not the perturbator itself, not already adjacent to it, and not another
/// perturbator, so every perturbator's degree grows by exactly `budget`.
/// Train nodes are never touched.
pub fn simulate_perturbators(bundle: &GraphBundle, split: &NodeSplit, spec: &PerturbSpec) -> Result<Perturbation> {
    spec.validate()?;
    split.validate(bundle.num_nodes())?;
    let pool = split.val_test();
    if pool.len() < spec.budget + 1 {
        return Err(Error::InsufficientVictims {
            perturbator: pool.first().copied().unwrap_or(0),
            available: pool.len().saturating_sub(1),
            budget: spec.budget,
        });
    }
    let mut rng = stage_rng(spec.seed, Stage::Perturb);
    let count = spec.perturbator_count(pool.len());
    let chosen: Vec<usize> = index::sample(&mut rng, pool.len(), count).into_iter().map(|i| pool[i]).collect();
    let is_perturbator: HashSet<usize> = chosen.iter().copied().collect();

    let mut neighbors: Vec<HashSet<usize>> = vec![HashSet::new(); bundle.num_nodes()];
    for &(u, v) in bundle.edges() {
        neighbors[u].insert(v);
        neighbors[v].insert(u);
    }
    let mut added = Vec::with_capacity(count * spec.budget);
    for &p in &chosen {
        let candidates: Vec<usize> = pool
            .iter()
            .copied()
            .filter(|&v| v != p && !is_perturbator.contains(&v) && !neighbors[p].contains(&v))
            .collect();
        if candidates.len() < spec.budget {
            return Err(Error::InsufficientVictims {
                perturbator: p,
                available: candidates.len(),
                budget: spec.budget,
            });
        }
        for i in index::sample(&mut rng, candidates.len(), spec.budget) {
            let v = candidates[i];
            neighbors[p].insert(v);
            neighbors[v].insert(p);
            added.push(if p < v { (p, v) } else { (v, p) });
        }
    }
    added.sort_unstable();
    let perturbed = bundle.with_edges(bundle.edges().iter().copied().chain(added.iter().copied()))?;
    let mut perturbators = chosen;
    perturbators.sort_unstable();
    Ok(Perturbation {
        bundle: perturbed,
        perturbators,
        added_edges: added,
    })
}

/// Writes `noisy_labels.txt` and `noise.json` into `dir`.
pub fn write_noise(dir: &Path, noisy: &[ClassId], manifest: &NoiseManifest) -> Result<()> {
    write_labels(&dir.join(NOISY_LABELS_FILE), noisy)?;
    write_json(&dir.join(NOISE_MANIFEST_FILE), manifest)
}

/// Writes the full perturbed edge list and `perturb.json` into `dir`.
pub fn write_perturbation(dir: &Path, perturbation: &Perturbation, spec: &PerturbSpec) -> Result<()> {
    write_edges(&dir.join(PERTURBED_EDGES_FILE), perturbation.bundle.edges())?;
    write_json(&dir.join(PERTURB_MANIFEST_FILE), &perturbation.manifest(spec))
}
