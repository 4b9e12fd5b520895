use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clustering::{ClusterAssignment, RepresentativeMethod, RepresentativeSet};

use super::SimilarityMatrix;

/// Relative tolerance under which two row sums count as tied.
const TIE_TOL: f64 = 1e-12;

/// Per cluster, the member with the largest total similarity to all
/// solutions; exact ties are broken uniformly at random from `seed`.
pub fn select_representatives_s(
    s: &SimilarityMatrix,
    assignment: &ClusterAssignment,
    seed: u64,
) -> RepresentativeSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let by_cluster = assignment
        .members()
        .into_iter()
        .map(|members| {
            let sums: Vec<f64> = members.iter().map(|&i| s.row_sum(i)).collect();
            let best = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let tied: Vec<usize> = members
                .iter()
                .zip(&sums)
                .filter(|(_, &v)| best - v <= TIE_TOL * best.abs().max(1.0))
                .map(|(&i, _)| i)
                .collect();
            if tied.len() == 1 {
                tied[0]
            } else {
                tied[rng.random_range(0..tied.len())]
            }
        })
        .collect();
    RepresentativeSet { by_cluster, method: RepresentativeMethod::Similarity }
}
