//! Random sub-sampling baseline.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::mlp_s::SimilarityMatrix;

use super::metrics::{mae, GradeOracle};
use super::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub grades: Vec<f64>,
    pub graded: Vec<usize>,
    pub mae: f64,
    /// MAE of every trial, in order.
    pub trial_maes: Vec<f64>,
}

/// Each trial grades `k` solutions drawn uniformly without replacement and
/// gives every other solution the grade of its most similar graded one
/// (lowest index on ties). The trial with the lowest MAE is returned.
pub fn random_baseline(
    s: &SimilarityMatrix,
    k: usize,
    truth: &[f64],
    seed: u64,
    trials: usize,
) -> Result<BaselineResult, EvalError> {
    let n = s.n();
    if k == 0 || k >= n {
        return Err(EvalError::InvalidK { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<BaselineResult> = None;
    let mut trial_maes = Vec::with_capacity(trials);
    for _ in 0..trials.max(1) {
        let mut oracle = GradeOracle::new(truth);
        let mut graded: Vec<usize> = sample(&mut rng, n, k).into_vec();
        graded.sort_unstable();
        let known: Vec<f64> = graded.iter().map(|&j| oracle.reveal(j)).collect();
        let grades: Vec<f64> = (0..n)
            .map(|j| {
                if let Ok(pos) = graded.binary_search(&j) {
                    return known[pos];
                }
                let mut best = 0;
                for (pos, &g) in graded.iter().enumerate() {
                    if s.get(j, g) > s.get(j, graded[best]) {
                        best = pos;
                    }
                }
                known[best]
            })
            .collect();
        debug_assert_eq!(oracle.count(), k);
        let set: BTreeSet<usize> = graded.iter().copied().collect();
        let m = mae(&grades, truth, &set)?;
        trial_maes.push(m);
        if best.as_ref().is_none_or(|b| m < b.mae) {
            best = Some(BaselineResult { grades, graded, mae: m, trial_maes: Vec::new() });
        }
    }
    let mut best = best.expect("at least one trial");
    best.trial_maes = trial_maes;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_auto_graded_solution() {
        let s = SimilarityMatrix::from_fn(3, |i, j| if i == j { 1.0 } else { 0.5 });
        let truth = [3.0, 1.0, 0.0];
        let r = random_baseline(&s, 2, &truth, 0, 10).unwrap();
        let auto = (0..3).find(|j| !r.graded.contains(j)).unwrap();
        assert_eq!(r.mae, (r.grades[auto] - truth[auto]).abs());
    }

    #[test]
    fn identical_solutions_equal_grades() {
        let s = SimilarityMatrix::from_fn(6, |_, _| 1.0);
        let r = random_baseline(&s, 2, &[2.0; 6], 9, 10).unwrap();
        assert_eq!(r.mae, 0.0);
    }

    #[test]
    fn best_of_more_trials_is_no_worse() {
        let s = SimilarityMatrix::from_fn(12, |i, j| 1.0 / (1.0 + (i as f64 - j as f64).abs()));
        let truth: Vec<f64> = (0..12).map(|j| (j / 3) as f64).collect();
        let few = random_baseline(&s, 3, &truth, 5, 3).unwrap();
        let many = random_baseline(&s, 3, &truth, 5, 10).unwrap();
        assert!(many.mae <= few.mae);
        assert_eq!(&many.trial_maes[..3], &few.trial_maes[..]);
    }
}
