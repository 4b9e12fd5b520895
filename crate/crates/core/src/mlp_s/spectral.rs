//! Normalized spectral clustering.
//!
//! Embed with the eigenvectors of `D^{-1/2} S D^{-1/2}` belonging to the
//! `K` largest eigenvalues (equivalently the bottom `K` of the normalized
//! Laplacian `I - D^{-1/2} S D^{-1/2}`), normalize each row to unit length
//! and run seeded k-means++ on the rows.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::clustering::ClusterAssignment;

use super::kmeans::{kmeans, KMeansConfig};
use super::{duplicate_groups, ClusterError, SimilarityMatrix};

pub fn spectral_cluster(
    s: &SimilarityMatrix,
    k: usize,
    seed: u64,
) -> Result<ClusterAssignment, ClusterError> {
    let n = s.n();
    if k < 2 || k > n {
        return Err(ClusterError::InvalidK { k, n });
    }

    // With one cluster per distinct solution the partition is forced; the
    // embedding cannot be trusted here because the top eigenvectors can
    // include null-space directions that merge distinct rows.
    let (groups, group_of) = duplicate_groups(s);
    if groups.len() == k {
        return Ok(ClusterAssignment::from_labels(&group_of));
    }

    // Solutions with zero similarity to everyone else become singletons,
    // provided enough clusters remain for the rest.
    let isolated = s.isolated();
    let split_isolates = !isolated.is_empty()
        && isolated.len() < k
        && n - isolated.len() >= k - isolated.len();
    let (rest, k_rest): (Vec<usize>, usize) = if split_isolates {
        log::debug!("{} isolated solutions split into singleton clusters", isolated.len());
        ((0..n).filter(|i| !isolated.contains(i)).collect(), k - isolated.len())
    } else {
        ((0..n).collect(), k)
    };

    let mut raw = vec![0usize; n];
    if split_isolates {
        for (c, &i) in isolated.iter().enumerate() {
            raw[i] = k_rest + c;
        }
    }
    let sub_labels = cluster_subset(s, &rest, k_rest, seed);
    for (&i, l) in rest.iter().zip(sub_labels) {
        raw[i] = l;
    }
    Ok(ClusterAssignment::from_labels(&raw))
}

fn cluster_subset(s: &SimilarityMatrix, idx: &[usize], k: usize, seed: u64) -> Vec<usize> {
    let m = idx.len();
    if k == 1 {
        return vec![0; m];
    }
    if k == m {
        return (0..m).collect();
    }
    let embedding = embed(s, idx, k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    kmeans(&embedding, k, &KMeansConfig::default(), &mut rng).labels
}

/// Row-normalized spectral embedding of the sub-matrix on `idx`.
pub fn embed(s: &SimilarityMatrix, idx: &[usize], k: usize) -> Vec<Vec<f64>> {
    let m = idx.len();
    let degree: Vec<f64> = idx.iter().map(|&i| idx.iter().map(|&j| s.get(i, j)).sum()).collect();
    let inv_sqrt: Vec<f64> = degree.iter().map(|d| if *d > 0.0 { d.sqrt().recip() } else { 0.0 }).collect();
    let affinity = DMatrix::from_fn(m, m, |a, b| inv_sqrt[a] * s.get(idx[a], idx[b]) * inv_sqrt[b]);
    let eig = SymmetricEigen::new(affinity);

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    (0..m)
        .map(|row| {
            let mut v: Vec<f64> = order[..k].iter().map(|&c| eig.eigenvectors[(row, c)]).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                v.iter_mut().for_each(|x| *x /= norm);
            }
            v
        })
        .collect()
}
