//! Affinity propagation (responsibility/availability message passing).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterAssignment;

use super::{duplicate_groups, SimilarityMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApConfig {
    /// Self-similarity; `None` uses the median off-diagonal similarity.
    pub preference: Option<f64>,
    pub damping: f64,
    pub max_iter: usize,
    /// Iterations the exemplar set must stay unchanged to stop.
    pub convergence_iter: usize,
    /// Seed for the tiny perturbation that breaks exact ties between
    /// identical solutions.
    pub tie_seed: u64,
}

impl Default for ApConfig {
    fn default() -> Self {
        Self { preference: None, damping: 0.9, max_iter: 1000, convergence_iter: 50, tie_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApResult {
    pub assignment: ClusterAssignment,
    /// `exemplars[k]` is the exemplar solution of cluster `k`.
    pub exemplars: Vec<usize>,
    pub iterations: usize,
    /// False when `max_iter` ran out before the exemplar set settled; the
    /// labeling is then the one from the final iteration.
    pub converged: bool,
}

const TIE_NOISE: f64 = 1e-12;

pub fn median_off_diagonal(s: &SimilarityMatrix) -> f64 {
    let n = s.n();
    let mut vals: Vec<f64> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| s.get(i, j))
        .collect();
    if vals.is_empty() {
        return 1.0;
    }
    vals.sort_by(f64::total_cmp);
    let m = vals.len();
    if m % 2 == 1 {
        vals[m / 2]
    } else {
        (vals[m / 2 - 1] + vals[m / 2]) / 2.0
    }
}

pub fn affinity_propagation(s: &SimilarityMatrix, config: &ApConfig) -> ApResult {
    let n = s.n();
    let pref = config.preference.unwrap_or_else(|| median_off_diagonal(s));

    // Solutions with identical similarity rows are merged into one weighted
    // point. Plain message passing splits responsibility evenly among exact
    // duplicates and never lets any of them win; the weighted problem has
    // the same net-similarity objective over duplicate-respecting labelings.
    let (groups, group_of) = duplicate_groups(s);
    let m = groups.len();
    if m == 1 {
        return ApResult {
            assignment: ClusterAssignment::singleton(n),
            exemplars: vec![0],
            iterations: 0,
            converged: true,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.tie_seed);
    let mut sim = vec![0.0; m * m];
    for a in 0..m {
        let (i, w) = (groups[a][0], groups[a].len() as f64);
        for b in 0..m {
            let base = if a == b {
                pref + (w - 1.0) * s.get(i, i)
            } else {
                w * s.get(i, groups[b][0])
            };
            let z: f64 = StandardNormal.sample(&mut rng);
            sim[a * m + b] = base + TIE_NOISE * (base.abs() + 1e-6) * z;
        }
    }
    let (exemplar_groups, iterations, converged) = message_passing(&sim, m, config);
    let exemplars_all: Vec<usize> = exemplar_groups.iter().map(|&g| groups[g][0]).collect();

    let raw: Vec<usize> = (0..n)
        .map(|i| {
            if let Some(pos) = exemplar_groups.iter().position(|&g| g == group_of[i]) {
                return pos;
            }
            let mut best = 0;
            for (pos, &e) in exemplars_all.iter().enumerate() {
                if s.get(i, e) > s.get(i, exemplars_all[best]) {
                    best = pos;
                }
            }
            best
        })
        .collect();
    let assignment = ClusterAssignment::from_labels(&raw);
    let mut exemplars = vec![0; assignment.k];
    for (pos, &e) in exemplars_all.iter().enumerate() {
        exemplars[assignment.labels[e]] = e;
        debug_assert_eq!(raw[e], pos);
    }
    ApResult { assignment, exemplars, iterations, converged }
}

/// Returns exemplar point indices (ascending), iterations run and whether
/// the exemplar set settled.
fn message_passing(sim: &[f64], n: usize, config: &ApConfig) -> (Vec<usize>, usize, bool) {
    let lambda = config.damping;
    let mut resp = vec![0.0; n * n];
    let mut avail = vec![0.0; n * n];
    let mut exemplar_flags = vec![false; n];
    let mut stable = 0usize;
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..config.max_iter {
        iterations = it + 1;
        // responsibilities
        for i in 0..n {
            let row = i * n;
            let (mut first, mut second, mut arg) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
            for k in 0..n {
                let v = avail[row + k] + sim[row + k];
                if v > first {
                    second = first;
                    first = v;
                    arg = k;
                } else if v > second {
                    second = v;
                }
            }
            for k in 0..n {
                let competitor = if k == arg { second } else { first };
                let new = sim[row + k] - competitor;
                resp[row + k] = lambda * resp[row + k] + (1.0 - lambda) * new;
            }
        }
        // availabilities
        for k in 0..n {
            let col_sum: f64 = (0..n)
                .map(|i| if i == k { resp[k * n + k] } else { resp[i * n + k].max(0.0) })
                .sum();
            for i in 0..n {
                let rp = if i == k { resp[k * n + k] } else { resp[i * n + k].max(0.0) };
                let mut new = col_sum - rp;
                if i != k {
                    new = new.min(0.0);
                }
                avail[i * n + k] = lambda * avail[i * n + k] + (1.0 - lambda) * new;
            }
        }

        let flags: Vec<bool> = (0..n).map(|k| avail[k * n + k] + resp[k * n + k] > 0.0).collect();
        if flags == exemplar_flags {
            stable += 1;
        } else {
            stable = 0;
            exemplar_flags = flags;
        }
        if stable >= config.convergence_iter && exemplar_flags.iter().any(|&f| f) {
            converged = true;
            break;
        }
    }

    let mut exemplars: Vec<usize> = (0..n).filter(|&k| exemplar_flags[k]).collect();
    if exemplars.is_empty() {
        converged = false;
        let best = (0..n)
            .max_by(|&a, &b| {
                (avail[a * n + a] + resp[a * n + a])
                    .total_cmp(&(avail[b * n + b] + resp[b * n + b]))
                    .then(b.cmp(&a))
            })
            .unwrap();
        exemplars.push(best);
    }
    if !converged {
        log::warn!("affinity propagation did not converge after {iterations} iterations");
    }
    (exemplars, iterations, converged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point() {
        let s = SimilarityMatrix::from_dense(1, vec![1.0]);
        let r = affinity_propagation(&s, &ApConfig::default());
        assert_eq!(r.assignment.k, 1);
        assert_eq!(r.exemplars, vec![0]);
    }

    #[test]
    fn three_groups_on_a_line() {
        // reference: sklearn AffinityPropagation(precomputed, damping 0.9)
        let x = [0.0, 0.3, 0.5, 0.9, 5.0, 5.4, 5.5, 9.8, 10.0, 10.1];
        let s = SimilarityMatrix::from_fn(10, |i, j| -(x[i] - x[j]) * (x[i] - x[j]));
        assert!((median_off_diagonal(&s) + 22.09).abs() < 1e-9);
        let r = affinity_propagation(&s, &ApConfig::default());
        assert!(r.converged);
        assert_eq!(r.assignment.labels, vec![0, 0, 0, 0, 1, 1, 1, 2, 2, 2]);
        assert_eq!(r.exemplars, vec![2, 5, 8]);
    }

    #[test]
    fn two_blocks_of_identical_solutions() {
        let truth = [0, 0, 0, 0, 1, 1, 1];
        let s = SimilarityMatrix::from_fn(7, |i, j| if truth[i] == truth[j] { 1.0 } else { 0.0 });
        let r = affinity_propagation(&s, &ApConfig::default());
        assert!(r.converged);
        assert_eq!(r.assignment.labels, vec![0, 0, 0, 0, 1, 1, 1]);
        assert_eq!(r.exemplars, vec![0, 4]);
    }

    #[test]
    fn all_identical_is_one_cluster() {
        let s = SimilarityMatrix::from_fn(5, |_, _| 1.0);
        let r = affinity_propagation(&s, &ApConfig::default());
        assert_eq!(r.assignment.k, 1);
    }

    #[test]
    fn median_preference() {
        let s = SimilarityMatrix::from_fn(3, |i, j| if i == j { 1.0 } else { (i + j) as f64 / 10.0 });
        // off-diagonal values: .1 .2 .1 .3 .2 .3
        assert!((median_off_diagonal(&s) - 0.2).abs() < 1e-15);
    }
}
