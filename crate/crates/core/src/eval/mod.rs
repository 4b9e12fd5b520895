//! Evaluation harness: MAE, the random sub-sampling baseline, planted
//! corpora and MAE-vs-K sweeps.

mod baseline;
mod experiment;
mod metrics;
mod synth;

pub use baseline::{random_baseline, BaselineResult};
pub use experiment::{
    grade_with, run_experiment, EvalMethod, ExperimentConfig, ExperimentReport, ExperimentRow,
};
pub use metrics::{mae, GradeOracle};
pub use synth::{feature_name, synth_generate, SyntheticCorpus, SyntheticSpec};

use crate::analysis::AnalysisError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("every solution was graded by the instructor; nothing left to evaluate")]
    EmptyAutoGradedSet,
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("dataset lacks ground-truth grades for some solutions")]
    MissingTruth,
    #[error("graded count {k} out of range for N = {n}")]
    InvalidK { k: usize, n: usize },
    #[error("{revealed} true grades revealed for {k} clusters")]
    GradeBudgetExceeded { revealed: usize, k: usize },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl PartialEq for EvalError {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}
