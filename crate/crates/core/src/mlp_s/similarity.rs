use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::features::{FeatureMatrix, FeatureVector};

use super::ClusterError;

/// Dense symmetric `N × N` similarity matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn from_dense(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "similarity matrix must be n × n");
        Self { n, data }
    }

    /// Build from a row-generating closure; only the upper triangle is
    /// evaluated and mirrored.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    /// `S[perm[i]][perm[j]]` at `(i, j)`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self::from_fn(self.n, |i, j| self.get(perm[i], perm[j]))
    }

    /// Solutions sharing no expression with any other solution.
    pub fn isolated(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&i| (0..self.n).all(|j| j == i || self.get(i, j) == 0.0))
            .collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Exact `y_a·y_b / min(y_a·y_a, y_b·y_b)` as a reduced fraction.
pub fn similarity_ratio(a: &FeatureVector, b: &FeatureVector) -> Result<Ratio<u64>, ClusterError> {
    let denom = a.dot(a).min(b.dot(b));
    if denom == 0 {
        return Err(ClusterError::ZeroColumn);
    }
    Ok(Ratio::new(a.dot(b), denom))
}

/// Pairwise similarity between all solutions.
pub fn similarity(y: &FeatureMatrix) -> Result<SimilarityMatrix, ClusterError> {
    if let Some(j) = y.columns.iter().position(FeatureVector::is_zero) {
        log::debug!("solution {j} has an empty feature column");
        return Err(ClusterError::ZeroColumn);
    }
    let norms: Vec<u64> = y.columns.iter().map(|c| c.dot(c)).collect();
    Ok(SimilarityMatrix::from_fn(y.n_solutions(), |i, j| {
        if i == j {
            1.0
        } else {
            y.columns[i].dot(&y.columns[j]) as f64 / norms[i].min(norms[j]) as f64
        }
    }))
}
