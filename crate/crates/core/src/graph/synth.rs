use rand_distr::{Distribution, Geometric, Normal};
use serde::{Deserialize, Serialize};

use super::GraphBundle;
use crate::error::{Error, Result};
use crate::matrix::Dense;
use crate::rng::{stage_rng, Stage, StageRng};

/// Stochastic block model with one-hot-plus-noise features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SbmConfig {
    pub blocks: usize,
    pub nodes_per_block: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub feature_noise: f64,
    pub seed: u64,
}

impl SbmConfig {
    /// Expected degree of a node.
    pub fn expected_degree(&self) -> f64 {
        let m = self.nodes_per_block as f64;
        self.p_in * (m - 1.0) + self.p_out * m * (self.blocks as f64 - 1.0)
    }

    fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.p_in) || !prob(self.p_out) || self.p_in <= self.p_out {
            return Err(Error::InvalidConfig(format!(
                "sbm probabilities must satisfy 0 <= p_out < p_in <= 1 (p_in={}, p_out={})",
                self.p_in, self.p_out
            )));
        }
        if self.blocks == 0 || self.nodes_per_block == 0 {
            return Err(Error::InvalidConfig("sbm needs at least one block and one node per block".into()));
        }
        if !(self.feature_noise >= 0.0 && self.feature_noise.is_finite()) {
            return Err(Error::InvalidConfig("feature_noise must be finite and >= 0".into()));
        }
        Ok(())
    }
}

/// Emits the positions in `0..total` of independent Bernoulli(p) successes,
/// jumping over failures with geometric gaps.
fn bernoulli_positions(total: u64, p: f64, rng: &mut StageRng, mut emit: impl FnMut(u64)) {
    if p <= 0.0 || total == 0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(emit);
        return;
    }
    let gap = Geometric::new(p).expect("0 < p < 1");
    let mut pos = 0u64;
    loop {
        pos = pos.saturating_add(gap.sample(rng));
        if pos >= total {
            return;
        }
        emit(pos);
        pos += 1;
    }
}

pub fn synth_sbm(cfg: &SbmConfig) -> Result<GraphBundle> {
    cfg.validate()?;
    let mut rng = stage_rng(cfg.seed, Stage::Synth);
    let (k, m) = (cfg.blocks, cfg.nodes_per_block);
    let n = k * m;
    let mut edges = Vec::new();

    for a in 0..k {
        // within block a: upper triangle, row by row
        let base = a * m;
        let mut row = 0usize;
        let mut row_start = 0u64;
        let tri = (m as u64) * (m as u64 - 1) / 2;
        bernoulli_positions(tri, cfg.p_in, &mut rng, |pos| {
            while pos >= row_start + (m - 1 - row) as u64 {
                row_start += (m - 1 - row) as u64;
                row += 1;
            }
            let col = row + 1 + (pos - row_start) as usize;
            edges.push((base + row, base + col));
        });
        for b in a + 1..k {
            let rect = (m as u64) * (m as u64);
            bernoulli_positions(rect, cfg.p_out, &mut rng, |pos| {
                let (i, j) = ((pos / m as u64) as usize, (pos % m as u64) as usize);
                edges.push((a * m + i, b * m + j));
            });
        }
    }

    let labels: Vec<usize> = (0..n).map(|i| i / m).collect();
    let noise = Normal::new(0.0, cfg.feature_noise).expect("validated scale");
    let mut features = Dense::<f32>::zeros(n, k);
    for (i, &label) in labels.iter().enumerate() {
        for j in 0..k {
            let base = if j == label { 1.0 } else { 0.0 };
            let eps = if cfg.feature_noise > 0.0 {
                noise.sample(&mut rng)
            } else {
                0.0
            };
            features.set(i, j, (base + eps) as f32);
        }
    }
    GraphBundle::new(k, edges, features, labels, None)
}
