//! Similarity-based clustering and grading.
//!
//! Pairwise similarity between solutions is the number of shared
//! expressions divided by the size of the smaller solution. Solutions are
//! clustered with spectral clustering (fixed `K`) or affinity propagation
//! (`K` chosen by the algorithm); the instructor grades one representative
//! per cluster and every member of a cluster inherits that grade.

mod affinity;
pub mod kmeans;
mod representatives;
mod similarity;
mod spectral;

use std::collections::{BTreeMap, HashMap};

pub use affinity::{affinity_propagation, median_off_diagonal, ApConfig, ApResult};
pub use representatives::select_representatives_s;
pub use similarity::{similarity, similarity_ratio, SimilarityMatrix};
pub use spectral::{embed, spectral_cluster};

use crate::clustering::ClusterAssignment;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClusterError {
    #[error("a solution has no features; similarity is undefined")]
    ZeroColumn,
    #[error("number of clusters {k} must be in 2..={n}")]
    InvalidK { k: usize, n: usize },
    #[error("no instructor grade for cluster {0}")]
    MissingClusterGrade(usize),
}

/// Every solution gets the grade of its cluster.
pub fn propagate_grades_s(
    assignment: &ClusterAssignment,
    cluster_grades: &BTreeMap<usize, f64>,
) -> Result<Vec<f64>, ClusterError> {
    if let Some(k) = (0..assignment.k).find(|k| !cluster_grades.contains_key(k)) {
        return Err(ClusterError::MissingClusterGrade(k));
    }
    Ok(assignment.labels.iter().map(|l| cluster_grades[l]).collect())
}

/// Groups solutions whose similarity rows are bit-identical, in order of
/// first appearance. Returns the groups and each solution's group.
pub(crate) fn duplicate_groups(s: &SimilarityMatrix) -> (Vec<Vec<usize>>, Vec<usize>) {
    let n = s.n();
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of = Vec::with_capacity(n);
    for i in 0..n {
        let key: Vec<u64> = s.row(i).iter().map(|x| x.to_bits()).collect();
        let g = *index.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
        group_of.push(g);
    }
    (groups, group_of)
}
