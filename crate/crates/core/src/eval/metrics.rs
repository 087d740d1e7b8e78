use crate::error::{Error, Result};
use crate::graph::ClassId;

/// Fraction of positions where `pred` equals `latent`.
pub fn accuracy(pred: &[ClassId], latent: &[ClassId]) -> Result<f64> {
    if pred.len() != latent.len() {
        return Err(Error::ShapeMismatch {
            context: "accuracy inputs",
            expected: latent.len().to_string(),
            found: pred.len().to_string(),
        });
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let hits = pred.iter().zip(latent).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// `K×K` counts, rows indexed by latent label and columns by prediction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionMatrix {
    k: usize,
    cells: Vec<u64>,
}

impl ConfusionMatrix {
    pub fn zeros(k: usize) -> Self {
        Self { k, cells: vec![0; k * k] }
    }

    pub fn num_classes(&self) -> usize {
        self.k
    }

    pub fn get(&self, latent: ClassId, pred: ClassId) -> u64 {
        self.cells[latent * self.k + pred]
    }

    pub fn row(&self, latent: ClassId) -> &[u64] {
        &self.cells[latent * self.k..(latent + 1) * self.k]
    }

    pub fn total(&self) -> u64 {
        self.cells.iter().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.k).map(|i| self.get(i, i)).sum()
    }

    /// Entrywise sum; both matrices must have the same size.
    pub fn accumulate(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.k, other.k, "confusion sizes differ");
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            *a += b;
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.k {
            let row: Vec<String> = self.row(i).iter().map(u64::to_string).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn confusion_matrix(pred: &[ClassId], latent: &[ClassId], k: usize) -> Result<ConfusionMatrix> {
    if pred.len() != latent.len() {
        return Err(Error::ShapeMismatch {
            context: "confusion inputs",
            expected: latent.len().to_string(),
            found: pred.len().to_string(),
        });
    }
    let mut m = ConfusionMatrix::zeros(k);
    for (node, (&p, &l)) in pred.iter().zip(latent).enumerate() {
        if p >= k || l >= k {
            return Err(Error::LabelOutOfRange {
                node,
                label: p.max(l),
                num_classes: k,
            });
        }
        m.cells[l * k + p] += 1;
    }
    Ok(m)
}

/// `log10(count + 1)` entrywise, row-major.
pub fn log_heatmap_export(confusion: &ConfusionMatrix) -> Vec<Vec<f64>> {
    (0..confusion.k)
        .map(|i| confusion.row(i).iter().map(|&c| (c as f64 + 1.0).log10()).collect())
        .collect()
}
