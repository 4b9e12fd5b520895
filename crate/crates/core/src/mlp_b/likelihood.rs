//! Observation model and CRP prior terms.
//!
//! Likelihoods leave out the multinomial coefficient `(Σy)!/Πy!`. It does
//! not depend on the cluster, so posteriors over `z_j` are unchanged, and
//! dropping it in both the occupied-cluster likelihood and the new-cluster
//! marginal keeps the two on the same footing.

use statrs::function::gamma::ln_gamma;

use crate::features::FeatureVector;

use super::math::ln_gamma_diff;
use super::MlpBError;

/// `ln Π_i φ_i^{y_i}`.
pub fn multinomial_likelihood(y: &FeatureVector, phi: &[f64]) -> Result<f64, MlpBError> {
    if y.is_zero() {
        return Err(MlpBError::ZeroVector);
    }
    if phi.len() != y.dim {
        return Err(MlpBError::DimensionMismatch { expected: y.dim, got: phi.len() });
    }
    Ok(y.entries.iter().map(|&(i, c)| c as f64 * phi[i].ln()).sum())
}

/// Same as [`multinomial_likelihood`] with `ln φ` precomputed; no checks.
pub fn log_likelihood(y: &FeatureVector, log_phi: &[f64]) -> f64 {
    y.entries.iter().map(|&(i, c)| c as f64 * log_phi[i]).sum()
}

/// CRP prior for one customer given the others.
#[derive(Debug, Clone, PartialEq)]
pub struct CrpMasses {
    pub occupied: Vec<f64>,
    pub new: f64,
}

/// `sizes` are cluster sizes excluding the current solution and must sum to
/// `n - 1`.
pub fn crp_conditional(sizes: &[usize], n: usize, alpha: f64) -> Result<CrpMasses, MlpBError> {
    let total: usize = sizes.iter().sum();
    if n == 0 || total != n - 1 {
        return Err(MlpBError::CountMismatch { expected: n.saturating_sub(1), got: total });
    }
    let denom = (n - 1) as f64 + alpha;
    Ok(CrpMasses {
        occupied: sizes.iter().map(|&s| s as f64 / denom).collect(),
        new: alpha / denom,
    })
}

/// `ln ∫ Π φ_i^{y_i} Dir(φ | β) dφ
///   = ln Γ(Vβ) − ln Γ(Σy + Vβ) + Σ_i [ln Γ(y_i + β) − ln Γ(β)]`.
pub fn new_cluster_marginal(y: &FeatureVector, beta: f64) -> f64 {
    let v = y.dim as f64;
    let per_feature: f64 = y.entries.iter().map(|&(_, c)| ln_gamma_diff(beta, c as u64)).sum();
    per_feature - ln_gamma_diff(v * beta, y.total())
}

/// Log evidence of per-cluster count vectors under a symmetric Dirichlet;
/// the quantity the β update maximizes.
pub fn dirichlet_evidence(counts: &[Vec<u32>], beta: f64) -> f64 {
    counts
        .iter()
        .map(|col| {
            let v = col.len() as f64;
            let total: u64 = col.iter().map(|&c| c as u64).sum();
            let per: f64 = col.iter().map(|&c| ln_gamma(c as f64 + beta) - ln_gamma(beta)).sum();
            per + ln_gamma(v * beta) - ln_gamma(total as f64 + v * beta)
        })
        .sum()
}
