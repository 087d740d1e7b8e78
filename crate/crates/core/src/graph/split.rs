use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stage_rng, Stage};

/// Disjoint train/validation/test node sets, each sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl NodeSplit {
    pub fn num_nodes(&self) -> usize {
        self.train.len() + self.val.len() + self.test.len()
    }

    /// Validation and test nodes, sorted.
    pub fn val_test(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self.val.iter().chain(&self.test).copied().collect();
        out.sort_unstable();
        out
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &i in self.train.iter().chain(&self.val).chain(&self.test) {
            if i >= n {
                return Err(Error::NodeOutOfRange {
                    index: i,
                    num_nodes: n,
                });
            }
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidConfig(format!("node {i} appears twice in split")));
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidConfig(format!("node {missing} missing from split")));
        }
        Ok(())
    }
}

/// 40/30/30 split: a seeded uniform permutation cut at `⌊0.4n⌋` and `⌊0.7n⌋`.
pub fn split_nodes(n: usize, seed: u64) -> Result<NodeSplit> {
    if n < 10 {
        return Err(Error::TooFewNodes(n));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stage_rng(seed, Stage::Split));
    let a = n * 4 / 10;
    let b = n * 7 / 10;
    let sorted = |s: &[usize]| {
        let mut v = s.to_vec();
        v.sort_unstable();
        v
    };
    Ok(NodeSplit {
        train: sorted(&perm[..a]),
        val: sorted(&perm[a..b]),
        test: sorted(&perm[b..]),
    })
}
