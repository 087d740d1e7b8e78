use serde::{Deserialize, Serialize};

use crate::classifier::CategoricalDistribution;
use crate::error::{Error, Result};
use crate::graph::ClassId;

/// Dirichlet concentration shared by every row of `φ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DirichletPrior {
    alpha: Vec<f64>,
    sum: f64,
}

impl TryFrom<Vec<f64>> for DirichletPrior {
    type Error = Error;

    fn try_from(alpha: Vec<f64>) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<DirichletPrior> for Vec<f64> {
    fn from(prior: DirichletPrior) -> Self {
        prior.alpha
    }
}

impl DirichletPrior {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() || alpha.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidConfig(format!(
                "Dirichlet parameters must be positive and finite, got {alpha:?}"
            )));
        }
        let sum = alpha.iter().sum();
        Ok(Self { alpha, sum })
    }

    pub fn symmetric(k: usize, alpha: f64) -> Result<Self> {
        Self::new(vec![alpha; k])
    }

    pub fn num_classes(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }
}

/// Row-stochastic `K×K` matrix, rows indexed by inferred label and columns
/// by noisy label.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    k: usize,
    data: Vec<f64>,
}

impl TransitionMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.len();
        let mut data = Vec::with_capacity(k * k);
        for (z, row) in rows.into_iter().enumerate() {
            if row.len() != k {
                return Err(Error::ShapeMismatch {
                    context: "transition matrix row",
                    expected: k.to_string(),
                    found: row.len().to_string(),
                });
            }
            if row.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
                return Err(Error::InvalidConfig(format!("transition row {z} has an entry outside (0, 1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!("transition row {z} sums to {s}")));
            }
            data.extend(row);
        }
        Ok(Self { k, data })
    }

    /// Posterior mean `(C + α)` normalized per row.
    pub fn from_counts(counts: &ConfusionCounts, prior: &DirichletPrior) -> Self {
        let k = counts.num_classes();
        let mut data = Vec::with_capacity(k * k);
        for z in 0..k {
            let denom = counts.row_total(z) as f64 + prior.sum();
            data.extend((0..k).map(|y| (counts.get(z, y) as f64 + prior.alpha()[y]) / denom));
        }
        Self { k, data }
    }

    pub fn num_classes(&self) -> usize {
        self.k
    }

    pub fn get(&self, z: ClassId, y: ClassId) -> f64 {
        self.data[z * self.k + y]
    }

    pub fn row(&self, z: ClassId) -> &[f64] {
        &self.data[z * self.k..(z + 1) * self.k]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.k).map(|z| self.row(z).to_vec()).collect()
    }
}

/// Integer `(inferred, noisy)` co-occurrence counts with cached row totals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionCounts {
    k: usize,
    cells: Vec<u64>,
    row_totals: Vec<u64>,
    total: u64,
}

impl ConfusionCounts {
    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            cells: vec![0; k * k],
            row_totals: vec![0; k],
            total: 0,
        }
    }

    pub fn from_assignments(z: &[ClassId], y: &[ClassId], k: usize) -> Result<Self> {
        if z.len() != y.len() {
            return Err(Error::ShapeMismatch {
                context: "assignments vs noisy labels",
                expected: y.len().to_string(),
                found: z.len().to_string(),
            });
        }
        let mut c = Self::zeros(k);
        for (node, (&zi, &yi)) in z.iter().zip(y).enumerate() {
            if zi >= k || yi >= k {
                return Err(Error::LabelOutOfRange {
                    node,
                    label: zi.max(yi),
                    num_classes: k,
                });
            }
            c.add(zi, yi);
        }
        Ok(c)
    }

    pub fn num_classes(&self) -> usize {
        self.k
    }

    pub fn get(&self, z: ClassId, y: ClassId) -> u64 {
        self.cells[z * self.k + y]
    }

    pub fn row_total(&self, z: ClassId) -> u64 {
        self.row_totals[z]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn add(&mut self, z: ClassId, y: ClassId) {
        self.cells[z * self.k + y] += 1;
        self.row_totals[z] += 1;
        self.total += 1;
    }

    pub fn remove(&mut self, z: ClassId, y: ClassId) -> Result<()> {
        let cell = &mut self.cells[z * self.k + y];
        if *cell == 0 {
            return Err(Error::CountUnderflow { z, y });
        }
        *cell -= 1;
        self.row_totals[z] -= 1;
        self.total -= 1;
        Ok(())
    }
}

/// Moves one `(old_z, y)` observation to `(new_z, y)`.
pub fn counts_remove_add(counts: &mut ConfusionCounts, old_z: ClassId, new_z: ClassId, y: ClassId) -> Result<()> {
    counts.remove(old_z, y)?;
    counts.add(new_z, y);
    Ok(())
}

/// Warm-up `φ′` from the classifier's argmax predictions against the noisy
/// labels of the train nodes, smoothed by the prior.
pub fn warmup_transition(
    train_dist: &CategoricalDistribution,
    train_noisy: &[ClassId],
    prior: &DirichletPrior,
) -> Result<TransitionMatrix> {
    let k = train_dist.num_classes();
    if prior.num_classes() != k {
        return Err(Error::ShapeMismatch {
            context: "prior length vs classes",
            expected: k.to_string(),
            found: prior.num_classes().to_string(),
        });
    }
    if train_dist.num_nodes() == 0 {
        return Err(Error::InvalidConfig("warm-up transition needs at least one train node".into()));
    }
    let preds = train_dist.argmax_labels();
    let counts = ConfusionCounts::from_assignments(&preds, train_noisy, k)?;
    Ok(TransitionMatrix::from_counts(&counts, prior))
}
