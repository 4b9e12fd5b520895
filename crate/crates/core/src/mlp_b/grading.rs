//! Likelihood-weighted grading and stepwise feedback.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clustering::{RepresentativeMethod, RepresentativeSet};
use crate::features::{FeatureMatrix, FeatureVector, SolutionFeatures};

use super::likelihood::log_likelihood;
use super::math::softmax;
use super::MlpBError;

/// `ln φ̂` columns, computed once per summary.
pub fn log_columns(phi_hat: &[Vec<f64>]) -> Vec<Vec<f64>> {
    phi_hat.iter().map(|c| c.iter().map(|x| x.ln()).collect()).collect()
}

/// Per cluster, the solution with the largest likelihood under `φ̂_k`
/// (ties to the lowest index). One solution may represent several
/// clusters.
pub fn select_representatives_b(phi_hat: &[Vec<f64>], y: &FeatureMatrix) -> RepresentativeSet {
    let log_phi = log_columns(phi_hat);
    let by_cluster = log_phi
        .iter()
        .map(|lp| {
            let mut best = (0, f64::NEG_INFINITY);
            for (j, col) in y.columns.iter().enumerate() {
                let l = log_likelihood(col, lp);
                if l > best.1 {
                    best = (j, l);
                }
            }
            best.0
        })
        .collect();
    RepresentativeSet { by_cluster, method: RepresentativeMethod::Likelihood }
}

fn grade_vector(k: usize, grades: &BTreeMap<usize, f64>) -> Result<Vec<f64>, MlpBError> {
    (0..k).map(|c| grades.get(&c).copied().ok_or(MlpBError::MissingGrades(c))).collect()
}

/// Posterior cluster weights `p(y | φ̂_k) / Σ_k' p(y | φ̂_k')`.
pub fn cluster_weights(y: &FeatureVector, log_phi: &[Vec<f64>]) -> Vec<f64> {
    let ll: Vec<f64> = log_phi.iter().map(|lp| log_likelihood(y, lp)).collect();
    softmax(&ll)
}

fn weighted(weights: &[f64], g: &[f64]) -> f64 {
    let num: f64 = weights.iter().zip(g).map(|(w, g)| w * g).sum();
    let den: f64 = weights.iter().sum();
    // Guard the convex combination against round-off.
    let (lo, hi) = g.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    (num / den).clamp(lo, hi)
}

/// `ĝ = Σ_k p(y|φ̂_k) g_k / Σ_k p(y|φ̂_k)`.
pub fn grade_b(
    y: &FeatureVector,
    phi_hat: &[Vec<f64>],
    grades: &BTreeMap<usize, f64>,
) -> Result<f64, MlpBError> {
    let g = grade_vector(phi_hat.len(), grades)?;
    Ok(weighted(&cluster_weights(y, &log_columns(phi_hat)), &g))
}

/// [`grade_b`] for every column of `y`.
pub fn grade_all_b(
    y: &FeatureMatrix,
    phi_hat: &[Vec<f64>],
    grades: &BTreeMap<usize, f64>,
) -> Result<Vec<f64>, MlpBError> {
    let g = grade_vector(phi_hat.len(), grades)?;
    let log_phi = log_columns(phi_hat);
    Ok(y.columns.iter().map(|c| weighted(&cluster_weights(c, &log_phi), &g)).collect())
}

/// Integer grade for error reporting; halves round away from zero.
pub fn round_grade(g: f64) -> f64 {
    g.round()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackStep {
    /// 1-based count of expressions seen.
    pub v: usize,
    pub expression: String,
    pub expected_grade: f64,
    /// Posterior mass on clusters below full credit.
    pub p_incorrect: f64,
    pub alert: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackTrace {
    pub learner_id: String,
    pub steps: Vec<FeedbackStep>,
    /// First `v` that raised an alert.
    pub first_alert: Option<usize>,
    pub g_max: f64,
    pub epsilon: f64,
}

/// Expected grade and probability of a below-full-credit cluster after
/// each prefix of the solution. An alert fires when the expected grade
/// drops below `g_max − epsilon`.
pub fn feedback_trace(
    solution: &SolutionFeatures,
    phi_hat: &[Vec<f64>],
    grades: &BTreeMap<usize, f64>,
    g_max: f64,
    epsilon: f64,
) -> Result<FeedbackTrace, MlpBError> {
    let g = grade_vector(phi_hat.len(), grades)?;
    let log_phi = log_columns(phi_hat);
    let mut steps = Vec::with_capacity(solution.len());
    for v in 1..=solution.len() {
        let y = solution.prefix_vector(v).expect("v in range");
        let w = cluster_weights(&y, &log_phi);
        let expected = weighted(&w, &g);
        let den: f64 = w.iter().sum();
        let below: f64 = w.iter().zip(&g).filter(|(_, &gk)| gk < g_max).fold(0.0, |acc, (w, _)| acc + w);
        steps.push(FeedbackStep {
            v,
            expression: solution.keys[v - 1].clone(),
            expected_grade: expected,
            p_incorrect: (below / den).clamp(0.0, 1.0),
            alert: expected < g_max - epsilon,
        });
    }
    let first_alert = steps.iter().find(|s| s.alert).map(|s| s.v);
    Ok(FeedbackTrace { learner_id: solution.learner_id.clone(), steps, first_alert, g_max, epsilon })
}
