//! Planted-cluster corpora with known labels and grades.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::SolutionContent;
use crate::io::{DatasetFile, SolutionRecord};

use super::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n: usize,
    pub v: usize,
    pub k_star: usize,
    /// Features per cluster support.
    pub support_size: usize,
    /// Fraction of each support taken from the previous cluster's own
    /// features (the last cluster wraps around to the first).
    pub overlap: f64,
    /// Independent per-feature flip probability.
    pub noise: f64,
    /// Grade of each planted cluster; defaults cycle `g_max, g_max−1, …, 0`.
    pub grades: Option<Vec<f64>>,
    pub g_max: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n: 120,
            v: 60,
            k_star: 6,
            support_size: 10,
            overlap: 0.2,
            noise: 0.05,
            grades: None,
            g_max: 3.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    /// Grades are filled in on every solution.
    pub dataset: DatasetFile,
    pub labels: Vec<usize>,
    pub grades: Vec<f64>,
}

impl SyntheticSpec {
    fn borrowed(&self) -> usize {
        if self.k_star < 2 {
            0
        } else {
            (self.overlap * self.support_size as f64).round() as usize
        }
    }

    pub fn cluster_grades(&self) -> Vec<f64> {
        match &self.grades {
            Some(g) => g.clone(),
            None => {
                let levels = self.g_max.floor() as usize + 1;
                (0..self.k_star).map(|k| self.g_max - (k % levels) as f64).collect()
            }
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: String| Err(EvalError::InvalidSpec(m));
        if self.k_star == 0 || self.k_star > self.n {
            return bad(format!("k_star must be in 1..={}", self.n));
        }
        if self.support_size == 0 {
            return bad("support_size must be positive".into());
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return bad("overlap must be in [0, 1)".into());
        }
        if !(0.0..0.5).contains(&self.noise) {
            return bad("noise must be in [0, 0.5)".into());
        }
        let own = self.support_size - self.borrowed().min(self.support_size);
        if own == 0 {
            return bad("overlap leaves no feature of its own to a cluster".into());
        }
        if self.k_star * own > self.v {
            return bad(format!("{} clusters × {own} own features exceed V = {}", self.k_star, self.v));
        }
        let grades = self.cluster_grades();
        if grades.len() != self.k_star {
            return bad("one grade per planted cluster required".into());
        }
        if grades.iter().any(|g| !(0.0..=self.g_max).contains(g)) {
            return bad("grades must lie in [0, g_max]".into());
        }
        Ok(())
    }

    /// Feature indices of each planted support.
    pub fn supports(&self) -> Vec<Vec<usize>> {
        let b = self.borrowed();
        let own = self.support_size - b;
        (0..self.k_star)
            .map(|k| {
                let prev = (k + self.k_star - 1) % self.k_star;
                let mut s: Vec<usize> = (k * own..(k + 1) * own).collect();
                s.extend(prev * own..prev * own + b);
                s.sort_unstable();
                s
            })
            .collect()
    }
}

pub fn feature_name(i: usize) -> String {
    format!("f{i:03}")
}

/// Balanced labels in shuffled order; each solution is its cluster's
/// support with every feature flipped independently with probability
/// `noise`. A solution left empty gets one random feature of its support.
pub fn synth_generate(spec: &SyntheticSpec) -> Result<SyntheticCorpus, EvalError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let supports = spec.supports();
    let cluster_grades = spec.cluster_grades();

    let mut labels: Vec<usize> = (0..spec.n).map(|j| j % spec.k_star).collect();
    labels.shuffle(&mut rng);

    let mut solutions = Vec::with_capacity(spec.n);
    for (j, &k) in labels.iter().enumerate() {
        let mut present = vec![false; spec.v];
        for &i in &supports[k] {
            present[i] = true;
        }
        for p in present.iter_mut() {
            if rng.random::<f64>() < spec.noise {
                *p = !*p;
            }
        }
        if !present.contains(&true) {
            present[supports[k][rng.random_range(0..supports[k].len())]] = true;
        }
        let keys = (0..spec.v).filter(|&i| present[i]).map(feature_name).collect();
        solutions.push(SolutionRecord {
            id: format!("syn-{j:04}"),
            content: SolutionContent::Keys(keys),
            grade: Some(cluster_grades[k]),
        });
    }
    let mut dataset = DatasetFile::new(format!("synthetic-{}", spec.seed), solutions);
    dataset.g_max = spec.g_max;
    let grades = labels.iter().map(|&k| cluster_grades[k]).collect();
    Ok(SyntheticCorpus { dataset, labels, grades })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn supports_borrow_from_previous_cluster() {
        let spec = SyntheticSpec::default();
        let s = spec.supports();
        assert_eq!(s.len(), 6);
        assert!(s.iter().all(|x| x.len() == 10));
        // cluster 0 borrows the first two own features of cluster 5
        assert_eq!(s[0], vec![0, 1, 2, 3, 4, 5, 6, 7, 40, 41]);
        assert_eq!(s[1], vec![0, 1, 8, 9, 10, 11, 12, 13, 14, 15]);
    }

    #[test]
    fn balanced_and_deterministic() {
        let spec = SyntheticSpec { seed: 4, ..SyntheticSpec::default() };
        let a = synth_generate(&spec).unwrap();
        let b = synth_generate(&spec).unwrap();
        assert_eq!(a.dataset.to_json_bytes(), b.dataset.to_json_bytes());
        let mut sizes = [0; 6];
        a.labels.iter().for_each(|&l| sizes[l] += 1);
        assert_eq!(sizes, [20; 6]);
        assert_eq!(spec.cluster_grades(), vec![3.0, 2.0, 1.0, 0.0, 3.0, 2.0]);
    }

    #[test]
    fn invalid_specs() {
        for spec in [
            SyntheticSpec { k_star: 0, ..SyntheticSpec::default() },
            SyntheticSpec { noise: 0.5, ..SyntheticSpec::default() },
            SyntheticSpec { v: 40, ..SyntheticSpec::default() },
            SyntheticSpec { grades: Some(vec![3.0]), ..SyntheticSpec::default() },
        ] {
            assert!(matches!(synth_generate(&spec), Err(EvalError::InvalidSpec(_))), "{spec:?}");
        }
    }
}
