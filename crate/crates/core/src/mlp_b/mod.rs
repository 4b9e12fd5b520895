//! Bayesian nonparametric clustering and grading.
//!
//! Each solution's feature vector is a draw from the multinomial of its
//! cluster; cluster labels follow a Chinese restaurant process with a
//! Gamma-distributed concentration `α`, and cluster parameters a symmetric
//! Dirichlet with concentration `β`. A Gibbs sampler explores the
//! posterior; the summary step fixes `K̂`, undoes label switching and
//! reports `Φ̂` and `ẑ`. Grades and feedback weight the instructor grades
//! by `p(y | φ̂_k)`.

mod alpha;
mod beta;
mod grading;
mod likelihood;
pub mod math;
mod sampler;
mod summary;

pub use alpha::sample_alpha;
pub use beta::{update_beta, BetaConfig, BetaUpdate};
pub use grading::{
    cluster_weights, feedback_trace, grade_all_b, grade_b, log_columns, round_grade,
    select_representatives_b, FeedbackStep, FeedbackTrace,
};
pub use likelihood::{
    crp_conditional, dirichlet_evidence, log_likelihood, multinomial_likelihood,
    new_cluster_marginal, CrpMasses,
};
pub use sampler::{
    gibbs_run, Checkpoint, GibbsSampler, GibbsState, GibbsTrace, ModelHyperparams, TraceSample,
};
pub use summary::{hungarian, summarize_posterior, PosteriorSummary};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MlpBError {
    #[error("feature vector is all zero")]
    ZeroVector,
    #[error("vector length {got} does not match vocabulary size {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cluster sizes sum to {got}, expected {expected}")]
    CountMismatch { expected: usize, got: usize },
    #[error("posterior trace is empty")]
    EmptyTrace,
    #[error("no instructor grade for cluster {0}")]
    MissingGrades(usize),
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("need at least two solutions, got {0}")]
    TooFewSolutions(usize),
    #[error("checkpoint is inconsistent with the data: {0}")]
    CorruptCheckpoint(String),
}
