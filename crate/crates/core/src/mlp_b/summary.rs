//! Posterior summary: `K̂`, label alignment, `Φ̂` and `ẑ`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::sampler::TraceSample;
use super::MlpBError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub k_hat: usize,
    /// Number of retained iterations per sampled `K`.
    pub k_counts: BTreeMap<usize, usize>,
    /// Fraction of retained iterations with `K = K̂`.
    pub mode_probability: f64,
    /// Position in the trace of the highest-likelihood `K = K̂` iteration.
    pub l_max: usize,
    /// `Φ̂`, one probability column per cluster.
    pub phi_hat: Vec<Vec<f64>>,
    pub z_hat: Vec<usize>,
    /// Iterations that entered the averages.
    pub n_aligned: usize,
}

/// Minimum-cost perfect matching on a square cost matrix.
///
/// Returns `assign` with `assign[row] = col`. O(n³) shortest augmenting
/// path with row/column potentials.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    assert!(cost.iter().all(|r| r.len() == n), "cost matrix must be square");
    // 1-based arrays; index 0 is the virtual start column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        matched_row[0] = row;
        let mut col0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let r0 = matched_row[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for c in 1..=n {
                if used[c] {
                    continue;
                }
                let cur = cost[r0 - 1][c - 1] - u[r0] - v[c];
                if cur < minv[c] {
                    minv[c] = cur;
                    way[c] = col0;
                }
                if minv[c] < delta {
                    delta = minv[c];
                    col1 = c;
                }
            }
            for c in 0..=n {
                if used[c] {
                    u[matched_row[c]] += delta;
                    v[c] -= delta;
                } else {
                    minv[c] -= delta;
                }
            }
            col0 = col1;
            if matched_row[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            matched_row[col0] = matched_row[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for c in 1..=n {
        assign[matched_row[c] - 1] = c - 1;
    }
    assign
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `K̂` is the most frequent `K` (ties to the smaller). Among `K = K̂`
/// iterations, the one with the highest data likelihood is the reference;
/// every other such iteration is relabeled by the matching that minimizes
/// total L1 distance between its `φ` columns and the reference's. `Φ̂` is
/// the mean of the aligned columns and `ẑ_j` the most frequent aligned
/// label (ties to the lower id).
///
/// Output cluster ids are put in a canonical order: first by the first
/// solution assigned to them in `ẑ`, then clusters no solution chose by
/// their `Φ̂` column. Relabeling the input therefore leaves the output
/// unchanged.
pub fn summarize_posterior(trace: &[TraceSample]) -> Result<PosteriorSummary, MlpBError> {
    if trace.is_empty() {
        return Err(MlpBError::EmptyTrace);
    }
    let mut k_counts = BTreeMap::new();
    for s in trace {
        *k_counts.entry(s.k).or_insert(0usize) += 1;
    }
    let (&k_hat, &top) = k_counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .expect("non-empty");
    let kept: Vec<usize> = (0..trace.len()).filter(|&l| trace[l].k == k_hat).collect();
    let l_max = *kept
        .iter()
        .max_by(|&&a, &&b| trace[a].log_likelihood.total_cmp(&trace[b].log_likelihood).then(b.cmp(&a)))
        .expect("mode is attained");

    let to_prob = |lp: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        lp.iter().map(|c| c.iter().map(|x| x.exp()).collect()).collect()
    };
    let reference = to_prob(&trace[l_max].log_phi);
    let v = reference.first().map_or(0, Vec::len);
    let n = trace[0].z.len();

    let mut phi_sum = vec![vec![0.0; v]; k_hat];
    let mut votes = vec![vec![0usize; k_hat]; n];
    for &l in &kept {
        let phi = to_prob(&trace[l].log_phi);
        let cost: Vec<Vec<f64>> =
            phi.iter().map(|a| reference.iter().map(|b| l1(a, b)).collect()).collect();
        let perm = hungarian(&cost);
        for (a, col) in phi.iter().enumerate() {
            for (acc, x) in phi_sum[perm[a]].iter_mut().zip(col) {
                *acc += x;
            }
        }
        for (j, &zj) in trace[l].z.iter().enumerate() {
            votes[j][perm[zj]] += 1;
        }
    }
    let m = kept.len() as f64;
    let phi_hat: Vec<Vec<f64>> =
        phi_sum.into_iter().map(|c| c.into_iter().map(|x| x / m).collect()).collect();
    let z_raw: Vec<usize> = votes
        .iter()
        .map(|vs| (0..k_hat).max_by(|&a, &b| vs[a].cmp(&vs[b]).then(b.cmp(&a))).unwrap())
        .collect();

    // canonical relabeling
    let mut order: Vec<usize> = Vec::with_capacity(k_hat);
    for &k in &z_raw {
        if !order.contains(&k) {
            order.push(k);
        }
    }
    let mut unused: Vec<usize> = (0..k_hat).filter(|k| !order.contains(k)).collect();
    unused.sort_by(|&a, &b| {
        phi_hat[a]
            .iter()
            .zip(&phi_hat[b])
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    order.extend(unused);
    let mut new_id = vec![0; k_hat];
    for (new, &old) in order.iter().enumerate() {
        new_id[old] = new;
    }

    Ok(PosteriorSummary {
        k_hat,
        mode_probability: top as f64 / trace.len() as f64,
        k_counts,
        l_max,
        phi_hat: order.iter().map(|&k| phi_hat[k].clone()).collect(),
        z_hat: z_raw.iter().map(|&k| new_id[k]).collect(),
        n_aligned: kept.len(),
    })
}
