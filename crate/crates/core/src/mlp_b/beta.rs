//! Fixed-point update of the symmetric Dirichlet concentration.

use serde::{Deserialize, Serialize};

use super::math::digamma_diff;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaConfig {
    pub tol: f64,
    pub max_iter: usize,
    pub beta_max: f64,
}

impl Default for BetaConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 100, beta_max: 1e6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaUpdate {
    pub beta: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The evidence was still increasing at `beta_max`.
    pub capped: bool,
}

/// Sufficient statistics: per cluster, the nonzero feature counts and the
/// vocabulary size `V`.
struct Stats<'a> {
    counts: &'a [Vec<u32>],
    v: f64,
}

impl Stats<'_> {
    fn num(&self, beta: f64) -> f64 {
        self.counts
            .iter()
            .flat_map(|c| c.iter())
            .filter(|&&c| c > 0)
            .map(|&c| digamma_diff(beta, c as u64))
            .sum()
    }

    fn den(&self, beta: f64) -> f64 {
        self.v
            * self
                .counts
                .iter()
                .map(|c| digamma_diff(self.v * beta, c.iter().map(|&x| x as u64).sum()))
                .sum::<f64>()
    }

    /// d/dβ of the log evidence.
    fn derivative(&self, beta: f64) -> f64 {
        self.num(beta) - self.den(beta)
    }
}

/// `β ← β · Σ_k Σ_i [ψ(n_ik + β) − ψ(β)] / (V Σ_k [ψ(n_k + Vβ) − ψ(Vβ)])`
/// until the relative change drops below `tol`.
///
/// `counts[k]` is the dense length-`V` count column of cluster `k`. When
/// the iteration runs out without converging, the evidence derivative
/// decides: positive at `beta_max` means the optimum lies beyond the cap,
/// otherwise the stationary point is located by bisection on the
/// derivative.
pub fn update_beta(counts: &[Vec<u32>], beta_old: f64, config: &BetaConfig) -> BetaUpdate {
    let v = counts.first().map_or(0, Vec::len);
    let stats = Stats { counts, v: v as f64 };
    let unchanged = BetaUpdate { beta: beta_old, iterations: 0, converged: false, capped: false };
    if v == 0 || counts.iter().all(|c| c.iter().all(|&x| x == 0)) {
        return unchanged;
    }

    let mut beta = beta_old.min(config.beta_max);
    for it in 1..=config.max_iter {
        let den = stats.den(beta);
        let num = stats.num(beta);
        if den <= 0.0 || num <= 0.0 {
            return BetaUpdate { iterations: it, ..unchanged };
        }
        let next = (beta * num / den).min(config.beta_max);
        let rel = (next - beta).abs() / beta;
        beta = next;
        if rel < config.tol {
            let capped = beta >= config.beta_max && stats.derivative(config.beta_max) > 0.0;
            return BetaUpdate { beta, iterations: it, converged: !capped, capped };
        }
    }

    if stats.derivative(config.beta_max) > 0.0 {
        log::debug!("beta update capped at {}", config.beta_max);
        return BetaUpdate { beta: config.beta_max, iterations: config.max_iter, converged: false, capped: true };
    }
    // Bracket the sign change of the derivative in log space, then bisect.
    let (mut lo, mut hi) = (beta, beta);
    while stats.derivative(lo) < 0.0 && lo > 1e-300 {
        lo /= 2.0;
    }
    while stats.derivative(hi) > 0.0 && hi < config.beta_max {
        hi = (hi * 2.0).min(config.beta_max);
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if stats.derivative(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) / lo < config.tol {
            break;
        }
    }
    BetaUpdate { beta: (lo * hi).sqrt(), iterations: config.max_iter, converged: true, capped: false }
}
