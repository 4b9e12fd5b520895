//! Gibbs sampler for the CRP mixture of multinomials.
//!
//! Occupied clusters carry an explicit `φ_k`; a solution considers a new
//! cluster through the Dirichlet-marginal likelihood and, when it opens
//! one, `φ` for that cluster is drawn right away from its posterior. After
//! the label sweep every `φ_k` is redrawn, then `α` and `β` are updated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::features::{FeatureMatrix, FeatureVector};
use crate::mlp_s::kmeans::{kmeans, KMeansConfig};

use super::alpha::sample_alpha;
use super::beta::{update_beta, BetaConfig};
use super::likelihood::{log_likelihood, new_cluster_marginal};
use super::math::{log_dirichlet_draw, sample_log_categorical};
use super::MlpBError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelHyperparams {
    /// Shape of the Gamma prior on `α`.
    pub alpha_shape: f64,
    /// Rate of the Gamma prior on `α`.
    pub alpha_rate: f64,
    /// Initial Dirichlet concentration; updated every sweep.
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub alpha_max: f64,
    pub beta_max: f64,
}

impl Default for ModelHyperparams {
    fn default() -> Self {
        Self {
            alpha_shape: 1.0,
            alpha_rate: 1.0,
            beta: 1.0,
            iterations: 10_000,
            burn_in: 2_000,
            seed: 0,
            alpha_max: 1e3,
            beta_max: 1e6,
        }
    }
}

impl ModelHyperparams {
    pub fn validate(&self) -> Result<(), MlpBError> {
        let bad = |m: &str| Err(MlpBError::InvalidHyperparams(m.to_owned()));
        let positive = [self.alpha_shape, self.alpha_rate, self.beta, self.alpha_max, self.beta_max];
        if positive.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return bad("alpha_shape, alpha_rate, beta and the caps must be positive and finite");
        }
        if self.iterations == 0 {
            return bad("iterations must be positive");
        }
        if self.burn_in >= self.iterations {
            return bad("burn_in must be smaller than iterations");
        }
        Ok(())
    }
}

/// Sampler state between sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsState {
    pub z: Vec<usize>,
    pub sizes: Vec<usize>,
    /// `counts[k][i]` = `n_{i,k}`.
    pub counts: Vec<Vec<u32>>,
    /// `ln φ_k`, one column per cluster.
    pub log_phi: Vec<Vec<f64>>,
    pub alpha: f64,
    pub beta: f64,
}

impl GibbsState {
    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    /// `ln p(Y | Φ, z)` without multinomial coefficients.
    pub fn log_likelihood(&self, y: &FeatureMatrix) -> f64 {
        y.columns.iter().zip(&self.z).map(|(col, &k)| log_likelihood(col, &self.log_phi[k])).sum()
    }

    /// Recomputes sizes and counts from `z` and compares.
    pub fn check_invariants(&self, y: &FeatureMatrix) -> Result<(), String> {
        let k = self.k();
        if self.counts.len() != k || self.log_phi.len() != k {
            return Err("per-cluster arrays disagree on K".into());
        }
        let mut sizes = vec![0usize; k];
        let mut counts = vec![vec![0u32; y.n_features()]; k];
        for (col, &zj) in y.columns.iter().zip(&self.z) {
            if zj >= k {
                return Err(format!("label {zj} out of range for K = {k}"));
            }
            sizes[zj] += 1;
            for &(i, c) in &col.entries {
                counts[zj][i] += c;
            }
        }
        if sizes != self.sizes {
            return Err(format!("sizes {:?} != recomputed {:?}", self.sizes, sizes));
        }
        if sizes.contains(&0) {
            return Err("empty occupied cluster".into());
        }
        if counts != self.counts {
            return Err("feature counts differ from recomputed counts".into());
        }
        for (c, lp) in self.log_phi.iter().enumerate() {
            let s: f64 = lp.iter().map(|x| x.exp()).sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(format!("phi column {c} sums to {s}"));
            }
        }
        Ok(())
    }
}

/// One retained post-burn-in iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub iteration: usize,
    pub z: Vec<usize>,
    pub log_phi: Vec<Vec<f64>>,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GibbsTrace {
    pub samples: Vec<TraceSample>,
    /// `K` after every sweep, burn-in included.
    pub k_history: Vec<usize>,
    pub alpha_capped: usize,
    pub beta_capped: usize,
}

impl GibbsTrace {
    /// `K` stayed at `N` for the whole retained chain: every solution in
    /// its own cluster, which usually means the chain never mixed.
    pub fn non_mixing(&self, n: usize) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|s| s.k == n)
    }
}

/// Everything needed to continue a chain bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub hyperparams: ModelHyperparams,
    pub state: GibbsState,
    pub iteration: usize,
    pub rng_seed: [u8; 32],
    pub rng_stream: u64,
    pub rng_word_pos: u128,
    pub trace: GibbsTrace,
}

pub struct GibbsSampler<'a> {
    y: &'a FeatureMatrix,
    hp: ModelHyperparams,
    state: GibbsState,
    rng: ChaCha8Rng,
    iteration: usize,
    trace: GibbsTrace,
    beta_cfg: BetaConfig,
}

impl<'a> GibbsSampler<'a> {
    pub fn new(y: &'a FeatureMatrix, hp: ModelHyperparams) -> Result<Self, MlpBError> {
        hp.validate()?;
        let n = y.n_solutions();
        if n < 2 {
            return Err(MlpBError::TooFewSolutions(n));
        }
        if y.columns.iter().any(FeatureVector::is_zero) {
            return Err(MlpBError::ZeroVector);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
        let state = initial_state(y, &hp, &mut rng);
        let beta_cfg = BetaConfig { beta_max: hp.beta_max, ..BetaConfig::default() };
        Ok(Self { y, hp, state, rng, iteration: 0, trace: GibbsTrace::default(), beta_cfg })
    }

    pub fn resume(y: &'a FeatureMatrix, cp: Checkpoint) -> Result<Self, MlpBError> {
        cp.hyperparams.validate()?;
        cp.state
            .check_invariants(y)
            .map_err(MlpBError::CorruptCheckpoint)?;
        let mut rng = ChaCha8Rng::from_seed(cp.rng_seed);
        rng.set_stream(cp.rng_stream);
        rng.set_word_pos(cp.rng_word_pos);
        let beta_cfg = BetaConfig { beta_max: cp.hyperparams.beta_max, ..BetaConfig::default() };
        Ok(Self {
            y,
            hp: cp.hyperparams,
            state: cp.state,
            rng,
            iteration: cp.iteration,
            trace: cp.trace,
            beta_cfg,
        })
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            hyperparams: self.hp.clone(),
            state: self.state.clone(),
            iteration: self.iteration,
            rng_seed: self.rng.get_seed(),
            rng_stream: self.rng.get_stream(),
            rng_word_pos: self.rng.get_word_pos(),
            trace: self.trace.clone(),
        }
    }

    pub fn state(&self) -> &GibbsState {
        &self.state
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn is_done(&self) -> bool {
        self.iteration >= self.hp.iterations
    }

    /// One full sweep: labels, cluster parameters, `α`, `β`.
    pub fn sweep(&mut self) {
        let n = self.y.n_solutions();
        for j in 0..n {
            self.resample_label(j);
        }
        self.resample_phi();

        let st = &mut self.state;
        let a = sample_alpha(st.k(), n, st.alpha, self.hp.alpha_shape, self.hp.alpha_rate, &mut self.rng);
        if a > self.hp.alpha_max {
            self.trace.alpha_capped += 1;
        }
        st.alpha = a.min(self.hp.alpha_max);

        let upd = update_beta(&st.counts, st.beta, &self.beta_cfg);
        if upd.capped {
            self.trace.beta_capped += 1;
        }
        st.beta = upd.beta;

        self.iteration += 1;
        self.trace.k_history.push(st.k());
        if self.iteration > self.hp.burn_in {
            self.trace.samples.push(TraceSample {
                iteration: self.iteration,
                z: st.z.clone(),
                log_phi: st.log_phi.clone(),
                k: st.k(),
                alpha: st.alpha,
                beta: st.beta,
                log_likelihood: st.log_likelihood(self.y),
            });
        }
    }

    /// Runs the remaining sweeps, calling `progress(done, total)` after each.
    pub fn run_with(mut self, mut progress: impl FnMut(usize, usize)) -> GibbsTrace {
        while !self.is_done() {
            self.sweep();
            progress(self.iteration, self.hp.iterations);
        }
        if self.trace.non_mixing(self.y.n_solutions()) {
            log::warn!("K stayed at N for the whole chain; the sampler did not mix");
        }
        self.trace
    }

    pub fn run(self) -> GibbsTrace {
        self.run_with(|_, _| {})
    }

    fn resample_label(&mut self, j: usize) {
        let y = self.y.column(j);
        let st = &mut self.state;
        let old = st.z[j];
        st.sizes[old] -= 1;
        for &(i, c) in &y.entries {
            st.counts[old][i] -= c;
        }
        if st.sizes[old] == 0 {
            st.sizes.remove(old);
            st.counts.remove(old);
            st.log_phi.remove(old);
            for z in st.z.iter_mut() {
                if *z > old {
                    *z -= 1;
                }
            }
        }

        // The common CRP denominator N − 1 + α cancels.
        let mut log_w: Vec<f64> = st
            .sizes
            .iter()
            .zip(&st.log_phi)
            .map(|(&s, lp)| (s as f64).ln() + log_likelihood(y, lp))
            .collect();
        log_w.push(st.alpha.ln() + new_cluster_marginal(y, st.beta));
        let k = sample_log_categorical(&log_w, &mut self.rng);

        if k == st.sizes.len() {
            let v = y.dim;
            let mut shape = vec![st.beta; v];
            for &(i, c) in &y.entries {
                shape[i] += c as f64;
            }
            st.log_phi.push(log_dirichlet_draw(&shape, &mut self.rng));
            st.sizes.push(0);
            st.counts.push(vec![0; v]);
        }
        st.z[j] = k;
        st.sizes[k] += 1;
        for &(i, c) in &y.entries {
            st.counts[k][i] += c;
        }
    }

    fn resample_phi(&mut self) {
        let st = &mut self.state;
        for (lp, counts) in st.log_phi.iter_mut().zip(&st.counts) {
            let shape: Vec<f64> = counts.iter().map(|&c| c as f64 + st.beta).collect();
            *lp = log_dirichlet_draw(&shape, &mut self.rng);
        }
    }
}

/// k-means++ on the binary columns with `K = ⌈N/10⌉`, then smoothed
/// empirical frequencies for `Φ`; `α` starts at its prior mean.
fn initial_state(y: &FeatureMatrix, hp: &ModelHyperparams, rng: &mut ChaCha8Rng) -> GibbsState {
    let n = y.n_solutions();
    let v = y.n_features();
    let k0 = n.div_ceil(10).max(1);
    let points: Vec<Vec<f64>> =
        y.columns.iter().map(|c| c.to_dense().into_iter().map(f64::from).collect()).collect();
    let km = kmeans(&points, k0, &KMeansConfig::default(), rng);
    let assignment = crate::clustering::ClusterAssignment::from_labels(&km.labels);

    let k = assignment.k;
    let mut sizes = vec![0usize; k];
    let mut counts = vec![vec![0u32; v]; k];
    for (col, &zj) in y.columns.iter().zip(&assignment.labels) {
        sizes[zj] += 1;
        for &(i, c) in &col.entries {
            counts[zj][i] += c;
        }
    }
    let log_phi = counts
        .iter()
        .map(|col| {
            let total: f64 = col.iter().map(|&c| c as f64).sum::<f64>() + v as f64 * hp.beta;
            col.iter().map(|&c| ((c as f64 + hp.beta) / total).ln()).collect()
        })
        .collect();
    GibbsState {
        z: assignment.labels,
        sizes,
        counts,
        log_phi,
        alpha: hp.alpha_shape / hp.alpha_rate,
        beta: hp.beta,
    }
}

pub fn gibbs_run(y: &FeatureMatrix, hp: &ModelHyperparams) -> Result<GibbsTrace, MlpBError> {
    Ok(GibbsSampler::new(y, hp.clone())?.run())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::EncodingMode;

    fn corpus(cols: &[&[&str]]) -> FeatureMatrix {
        let seqs = cols
            .iter()
            .enumerate()
            .map(|(j, ks)| (format!("s{j}"), ks.iter().map(|s| s.to_string()).collect()))
            .collect();
        FeatureMatrix::from_key_sequences(seqs, EncodingMode::Binary).unwrap().0
    }

    fn small_hp(seed: u64) -> ModelHyperparams {
        ModelHyperparams { iterations: 60, burn_in: 10, seed, ..ModelHyperparams::default() }
    }

    #[test]
    fn invariants_hold_after_every_sweep() {
        let y = corpus(&[&["a", "b"], &["a", "b"], &["c"], &["c", "d"], &["a"], &["d", "e"], &["b", "e"]]);
        let mut s = GibbsSampler::new(&y, small_hp(3)).unwrap();
        s.state().check_invariants(&y).unwrap();
        while !s.is_done() {
            s.sweep();
            s.state().check_invariants(&y).unwrap();
        }
    }

    #[test]
    fn trace_keeps_post_burn_in_only() {
        let y = corpus(&[&["a"], &["b"], &["a", "b"]]);
        let t = gibbs_run(&y, &small_hp(1)).unwrap();
        assert_eq!(t.samples.len(), 50);
        assert_eq!(t.k_history.len(), 60);
        assert_eq!(t.samples[0].iteration, 11);
    }

    #[test]
    fn same_seed_same_trace() {
        let y = corpus(&[&["a", "b"], &["c"], &["a", "c"], &["b"]]);
        assert_eq!(gibbs_run(&y, &small_hp(7)).unwrap(), gibbs_run(&y, &small_hp(7)).unwrap());
    }

    #[test]
    fn checkpoint_resume_is_bit_identical() {
        let y = corpus(&[&["a", "b"], &["c"], &["a", "c"], &["b"], &["d"], &["d", "a"]]);
        let full = gibbs_run(&y, &small_hp(5)).unwrap();

        let mut s = GibbsSampler::new(&y, small_hp(5)).unwrap();
        for _ in 0..25 {
            s.sweep();
        }
        let json = serde_json::to_string(&s.checkpoint()).unwrap();
        drop(s);
        let cp: Checkpoint = serde_json::from_str(&json).unwrap();
        let resumed = GibbsSampler::resume(&y, cp).unwrap().run();
        assert_eq!(full, resumed);
    }

    #[test]
    fn rejects_bad_input() {
        let y = corpus(&[&["a"]]);
        assert!(matches!(GibbsSampler::new(&y, small_hp(0)), Err(MlpBError::TooFewSolutions(1))));
        let y = corpus(&[&["a"], &["b"]]);
        let hp = ModelHyperparams { burn_in: 60, ..small_hp(0) };
        assert!(matches!(GibbsSampler::new(&y, hp), Err(MlpBError::InvalidHyperparams(_))));
    }
}
