//! Seeded k-means++ with Lloyd refinement.
//!
//! Used for the spectral embedding and for initializing the Gibbs sampler.
//! Every returned cluster is non-empty: an empty cluster steals the point
//! farthest from its own center out of a cluster with two or more members.

use rand::Rng;

#[derive(Debug, Clone)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self { restarts: 10, max_iter: 300 }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub inertia: f64,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Best of `config.restarts` runs by inertia (first wins ties).
///
/// Panics if `k == 0` or `k > points.len()`.
pub fn kmeans<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    k: usize,
    config: &KMeansConfig,
    rng: &mut R,
) -> KMeansResult {
    assert!(k >= 1 && k <= points.len(), "k must be in 1..=n");
    let mut best: Option<KMeansResult> = None;
    for _ in 0..config.restarts.max(1) {
        let run = lloyd(points, seed_centers(points, k, rng), config.max_iter);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    best.unwrap()
}

/// k-means++ seeding: each new center drawn with probability ∝ D².
/// When every remaining point coincides with a center, an unchosen point
/// is drawn uniformly.
pub fn seed_centers<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![points[first].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut idx = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if d > 0.0 && u < d {
                    idx = i;
                    break;
                }
                u -= d;
            }
            if d2[idx] == 0.0 {
                // Round-off at the tail; take the last point with positive mass.
                idx = d2.iter().rposition(|&d| d > 0.0).unwrap();
            }
            idx
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centers.push(points[pick].clone());
        let c = centers.last().unwrap();
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(dist2(p, c));
        }
    }
    centers
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = dist2(p, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

pub fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>, max_iter: usize) -> KMeansResult {
    let k = centers.len();
    let dim = points.first().map_or(0, Vec::len);
    let mut labels = vec![usize::MAX; points.len()];
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (mut c, d) = nearest(p, &centers);
            // Keep the current label on ties so duplicates stay put.
            if labels[i] != usize::MAX && dist2(p, &centers[labels[i]]) <= d {
                c = labels[i];
            }
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        changed |= repair_empty(points, &mut labels, &mut centers);
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let inertia = points.iter().zip(&labels).map(|(p, &l)| dist2(p, &centers[l])).sum();
    KMeansResult { labels, centers, inertia }
}

fn repair_empty(points: &[Vec<f64>], labels: &mut [usize], centers: &mut [Vec<f64>]) -> bool {
    let k = centers.len();
    let mut repaired = false;
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return repaired;
        };
        let donor = (0..points.len())
            .filter(|&i| counts[labels[i]] > 1)
            .map(|i| (i, dist2(&points[i], &centers[labels[i]])))
            .fold(None, |acc: Option<(usize, f64)>, (i, d)| match acc {
                Some((_, bd)) if bd >= d => acc,
                _ => Some((i, d)),
            });
        let Some((i, _)) = donor else {
            return repaired;
        };
        labels[i] = empty;
        centers[empty] = points[i].clone();
        repaired = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separates_obvious_groups() {
        let pts = vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![10.0, 10.0], vec![10.0, 10.1]];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = kmeans(&pts, 2, &KMeansConfig::default(), &mut rng);
        assert_eq!(r.labels[0], r.labels[1]);
        assert_eq!(r.labels[2], r.labels[3]);
        assert_ne!(r.labels[0], r.labels[2]);
    }

    #[test]
    fn duplicates_with_k_equal_n_are_all_singletons() {
        let pts = vec![vec![1.0]; 5];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = kmeans(&pts, 5, &KMeansConfig::default(), &mut rng);
        let mut l = r.labels.clone();
        l.sort_unstable();
        assert_eq!(l, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn no_empty_clusters() {
        let pts: Vec<Vec<f64>> = (0..20).map(|i| vec![(i % 3) as f64]).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = kmeans(&pts, 7, &KMeansConfig::default(), &mut rng);
        for c in 0..7 {
            assert!(r.labels.contains(&c));
        }
    }
}
