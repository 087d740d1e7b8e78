use rayon::prelude::*;

use super::GraphBundle;
use crate::error::{Error, Result};
use crate::matrix::{Dense, Real};

const PAR_THRESHOLD: usize = 1 << 14;

/// `D̃^{-1/2} (A + I) D̃^{-1/2}` in compressed-row form.
///
/// Column indices within a row are sorted and include the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedAdjacency {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    degree: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn from_bundle(bundle: &GraphBundle) -> Self {
        Self::from_edges(bundle.num_nodes(), bundle.edges())
    }

    /// Builds from canonical, deduplicated, loop-free edges.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        // D̃ = D + I, i.e. the row length including the self-loop
        let degree: Vec<f64> = adj.iter().map(|r| r.len() as f64).collect();
        let inv_sqrt: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(n + 2 * edges.len());
        let mut values = Vec::with_capacity(n + 2 * edges.len());
        row_ptr.push(0);
        for (i, mut cols) in adj.into_iter().enumerate() {
            cols.sort_unstable();
            for j in cols {
                col_idx.push(j);
                values.push(inv_sqrt[i] * inv_sqrt[j]);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            row_ptr,
            col_idx,
            values,
            degree,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.degree.len()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Diagonal of D̃.
    pub fn degree(&self) -> &[f64] {
        &self.degree
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&j) {
            Ok(p) => self.values[span.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Dense<f64> {
        let n = self.num_nodes();
        let mut out = Dense::zeros(n, n);
        for i in 0..n {
            for (j, v) in self.row(i) {
                out.set(i, j, v);
            }
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.num_nodes()).all(|i| self.row(i).all(|(j, v)| self.get(j, i) == v))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.num_nodes())
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `Â · rhs`.
    pub fn spmm<T: Real>(&self, rhs: &Dense<T>) -> Result<Dense<T>> {
        if rhs.rows() != self.num_nodes() {
            return Err(Error::ShapeMismatch {
                context: "normalized adjacency product",
                expected: format!("{} rows", self.num_nodes()),
                found: format!("{} rows", rhs.rows()),
            });
        }
        let cols = rhs.cols();
        let mut out = Dense::zeros(rhs.rows(), cols);
        if cols == 0 {
            return Ok(out);
        }
        let kernel = |(i, out_row): (usize, &mut [T])| {
            for (j, v) in self.row(i) {
                let w = T::from(v).expect("float cast");
                for (o, &b) in out_row.iter_mut().zip(rhs.row(j)) {
                    *o = *o + w * b;
                }
            }
        };
        if rhs.rows() * cols >= PAR_THRESHOLD {
            out.as_mut_slice()
                .par_chunks_mut(cols)
                .enumerate()
                .for_each(kernel);
        } else {
            out.as_mut_slice()
                .chunks_mut(cols)
                .enumerate()
                .for_each(kernel);
        }
        Ok(out)
    }

    /// `Â^hops · rhs`.
    pub fn propagate<T: Real>(&self, rhs: &Dense<T>, hops: usize) -> Result<Dense<T>> {
        let mut cur = rhs.clone();
        for _ in 0..hops {
            cur = self.spmm(&cur)?;
        }
        Ok(cur)
    }
}
