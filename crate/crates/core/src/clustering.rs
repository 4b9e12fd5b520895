//! Types shared by the similarity-based and Bayesian clustering paths.

use serde::{Deserialize, Serialize};

/// Hard partition of `N` solutions into `K` non-empty clusters.
///
/// Cluster ids are `0..K`, numbered in order of each cluster's first member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
}

impl ClusterAssignment {
    /// Relabel arbitrary ids into first-appearance order.
    pub fn from_labels(raw: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels = raw
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Self { labels, k: map.len() }
    }

    pub fn singleton(n: usize) -> Self {
        Self { labels: vec![0; n], k: usize::from(n > 0) }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Index sets `C_k`, each sorted ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (j, &l) in self.labels.iter().enumerate() {
            out[l].push(j);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for &l in &self.labels {
            out[l] += 1;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentativeMethod {
    /// Highest total similarity within the cluster.
    Similarity,
    /// Highest likelihood under the cluster's multinomial.
    Likelihood,
}

/// One representative solution per cluster, for the instructor to grade.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepresentativeSet {
    /// `by_cluster[k]` is the solution index representing cluster `k`.
    pub by_cluster: Vec<usize>,
    pub method: RepresentativeMethod,
}

impl RepresentativeSet {
    /// Distinct solutions to grade, ascending.
    pub fn solutions(&self) -> Vec<usize> {
        let mut s = self.by_cluster.clone();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Clusters whose representative also represents another cluster.
    pub fn shared_clusters(&self) -> Vec<usize> {
        (0..self.by_cluster.len())
            .filter(|&k| {
                self.by_cluster
                    .iter()
                    .enumerate()
                    .any(|(k2, &j)| k2 != k && j == self.by_cluster[k])
            })
            .collect()
    }
}

/// Chance-corrected agreement between two partitions of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "partitions must cover the same items");
    let n = a.len();
    if n < 2 {
        return 1.0;
    }
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut table = vec![vec![0u64; kb]; ka];
    for (&x, &y) in a.iter().zip(b) {
        table[x][y] += 1;
    }
    let comb2 = |m: u64| (m * m.saturating_sub(1)) as f64 / 2.0;
    let sum_cells: f64 = table.iter().flatten().map(|&m| comb2(m)).sum();
    let sum_a: f64 = table.iter().map(|row| comb2(row.iter().sum())).sum();
    let sum_b: f64 = (0..kb).map(|c| comb2(table.iter().map(|row| row[c]).sum())).sum();
    let total = comb2(n as u64);
    let expected = sum_a * sum_b / total;
    let max = (sum_a + sum_b) / 2.0;
    if (max - expected).abs() < f64::EPSILON {
        // Both partitions trivial (all-in-one or all singletons) and equal.
        return if sum_cells == max { 1.0 } else { 0.0 };
    }
    (sum_cells - expected) / (max - expected)
}
