use serde::{Deserialize, Serialize};

use crate::clustering::ClusterAssignment;
use crate::mlp_s::SimilarityMatrix;

use super::IoError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: String,
    pub cluster: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grade: Option<f64>,
    pub representative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Solutions as nodes, similarities at or above `threshold` as edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphExport {
    pub threshold: f64,
    pub nodes: Vec<GraphNode>,
    /// `source < target`, sorted by `(source, target)`.
    pub edges: Vec<GraphEdge>,
}

pub fn export_graph(
    s: &SimilarityMatrix,
    ids: &[String],
    assignment: &ClusterAssignment,
    grades: &[Option<f64>],
    representatives: &[usize],
    threshold: f64,
) -> Result<GraphExport, IoError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(IoError::InvalidThreshold(threshold));
    }
    let n = s.n();
    let nodes = (0..n)
        .map(|j| GraphNode {
            id: ids[j].clone(),
            cluster: assignment.labels[j],
            grade: grades.get(j).copied().flatten(),
            representative: representatives.contains(&j),
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let w = s.get(i, j);
            if w >= threshold {
                edges.push(GraphEdge { source: i, target: j, weight: w });
            }
        }
    }
    Ok(GraphExport { threshold, nodes, edges })
}
