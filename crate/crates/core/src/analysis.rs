//! End-to-end pipeline shared by the command line, the HTTP service and the
//! evaluation harness: featurize a dataset, cluster, pick representatives,
//! then turn representative grades into grades for every solution.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::clustering::{ClusterAssignment, RepresentativeSet};
use crate::features::{build_matrix, FeatureError, FeatureMatrix, SolutionContent, SolutionFeatures};
use crate::io::{export_graph, DatasetFile, GraphExport, IoError};
use crate::mlp_b::{
    feedback_trace, grade_all_b, round_grade, select_representatives_b, summarize_posterior,
    FeedbackTrace, GibbsSampler, MlpBError, ModelHyperparams, PosteriorSummary,
};
use crate::mlp_s::{
    affinity_propagation, propagate_grades_s, select_representatives_s, similarity, spectral_cluster,
    ApConfig, ClusterError, SimilarityMatrix,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Spectral clustering with a given `K`.
    Sc,
    /// Affinity propagation; `K` is chosen by the algorithm.
    Ap,
    /// CRP mixture with Gibbs sampling.
    Bayes,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Sc => "MLP-S/SC",
            Method::Ap => "MLP-S/AP",
            Method::Bayes => "MLP-B",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sc => "sc",
            Method::Ap => "ap",
            Method::Bayes => "bayes",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sc" | "spectral" => Ok(Method::Sc),
            "ap" | "affinity" => Ok(Method::Ap),
            "bayes" | "b" | "mlp-b" => Ok(Method::Bayes),
            other => Err(format!("unknown method `{other}` (expected sc, ap or bayes)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisParams {
    pub method: Method,
    /// Cluster count for spectral clustering.
    pub k: Option<usize>,
    pub seed: u64,
    pub ap: ApConfig,
    pub gibbs: ModelHyperparams,
    /// Feedback alerts fire when the expected grade drops below
    /// `g_max − epsilon`.
    pub epsilon: f64,
}

impl Default for AnalysisParams {
    fn default() -> Self {
        Self {
            method: Method::Ap,
            k: None,
            seed: 0,
            ap: ApConfig::default(),
            gibbs: ModelHyperparams::default(),
            epsilon: 0.5,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Model(#[from] MlpBError),
    #[error("spectral clustering needs a cluster count")]
    MissingK,
    #[error("no grade for representative `{0}`")]
    MissingGrade(String),
    #[error("`{0}` is not a representative of this analysis")]
    NotRepresentative(String),
    #[error("unknown solution `{0}`")]
    UnknownSolution(String),
    #[error("grade {grade} for `{id}` outside [0, {g_max}]")]
    GradeOutOfRange { id: String, grade: f64, g_max: f64 },
}

impl AnalysisError {
    /// Errors in what the caller supplied, as opposed to model failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            AnalysisError::Feature(_) | AnalysisError::MissingK | AnalysisError::Cluster(ClusterError::InvalidK { .. })
        )
    }
}

/// Featurized dataset.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub ids: Vec<String>,
    pub g_max: f64,
    pub y: FeatureMatrix,
    pub solutions: Vec<SolutionFeatures>,
    pub s: SimilarityMatrix,
}

impl Prepared {
    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }
}

pub fn prepare(dataset: &DatasetFile) -> Result<Prepared, AnalysisError> {
    let (y, solutions) = build_matrix(&dataset.raw_solutions(), dataset.simplification, dataset.encoding)?;
    let s = similarity(&y)?;
    Ok(Prepared {
        ids: dataset.solutions.iter().map(|s| s.id.clone()).collect(),
        g_max: dataset.g_max,
        y,
        solutions,
        s,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApDiagnostics {
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesDiagnostics {
    pub summary: PosteriorSummary,
    pub alpha_capped: usize,
    pub beta_capped: usize,
    pub non_mixing: bool,
}

/// Clustering and representatives for one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub method: Method,
    pub seed: u64,
    pub ids: Vec<String>,
    pub g_max: f64,
    /// Under MLP-B the labels are the posterior-mode labels `ẑ`; a cluster
    /// no solution chose keeps its id and stays empty.
    pub assignment: ClusterAssignment,
    pub representatives: RepresentativeSet,
    /// Clusters sharing their representative with another cluster.
    pub shared_representatives: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ap: Option<ApDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bayes: Option<BayesDiagnostics>,
}

pub fn analyze(prep: &Prepared, params: &AnalysisParams) -> Result<Analysis, AnalysisError> {
    analyze_with_progress(prep, params, |_, _| {})
}

/// `progress(done, total)` is called after every Gibbs sweep.
pub fn analyze_with_progress(
    prep: &Prepared,
    params: &AnalysisParams,
    progress: impl FnMut(usize, usize),
) -> Result<Analysis, AnalysisError> {
    let (assignment, representatives, ap, bayes) = match params.method {
        Method::Sc => {
            let k = params.k.ok_or(AnalysisError::MissingK)?;
            let a = spectral_cluster(&prep.s, k, params.seed)?;
            let r = select_representatives_s(&prep.s, &a, params.seed);
            (a, r, None, None)
        }
        Method::Ap => {
            let cfg = ApConfig { tie_seed: params.seed, ..params.ap.clone() };
            let res = affinity_propagation(&prep.s, &cfg);
            let r = select_representatives_s(&prep.s, &res.assignment, params.seed);
            let diag = ApDiagnostics { iterations: res.iterations, converged: res.converged };
            (res.assignment, r, Some(diag), None)
        }
        Method::Bayes => {
            let hp = ModelHyperparams { seed: params.seed, ..params.gibbs.clone() };
            let trace = GibbsSampler::new(&prep.y, hp)?.run_with(progress);
            let summary = summarize_posterior(&trace.samples)?;
            let r = select_representatives_b(&summary.phi_hat, &prep.y);
            let a = ClusterAssignment { labels: summary.z_hat.clone(), k: summary.k_hat };
            let diag = BayesDiagnostics {
                alpha_capped: trace.alpha_capped,
                beta_capped: trace.beta_capped,
                non_mixing: trace.non_mixing(prep.n()),
                summary,
            };
            (a, r, None, Some(diag))
        }
    };
    Ok(Analysis {
        method: params.method,
        seed: params.seed,
        ids: prep.ids.clone(),
        g_max: prep.g_max,
        shared_representatives: representatives.shared_clusters(),
        assignment,
        representatives,
        ap,
        bayes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionGrade {
    pub id: String,
    pub cluster: usize,
    pub grade: f64,
    /// Nearest integer, halves away from zero.
    pub rounded: f64,
    /// Graded by the instructor rather than propagated.
    pub instructor: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeReport {
    pub method: Method,
    pub g_max: f64,
    pub cluster_grades: Vec<f64>,
    pub shared_representatives: Vec<usize>,
    pub solutions: Vec<SolutionGrade>,
}

/// One representative to show the instructor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentativeEntry {
    pub id: String,
    /// Every cluster this solution represents.
    pub clusters: Vec<usize>,
    #[serde(flatten)]
    pub content: SolutionContent,
}

impl GradeReport {
    pub fn grades(&self) -> Vec<f64> {
        self.solutions.iter().map(|s| s.grade).collect()
    }
}

impl Analysis {
    /// Representative solution indices, each listed once.
    pub fn to_grade(&self) -> Vec<usize> {
        self.representatives.solutions()
    }

    /// Representatives in solution order with their content from `dataset`.
    pub fn representative_entries(&self, dataset: &DatasetFile) -> Vec<RepresentativeEntry> {
        self.to_grade()
            .into_iter()
            .map(|j| RepresentativeEntry {
                id: self.ids[j].clone(),
                clusters: (0..self.representatives.by_cluster.len())
                    .filter(|&k| self.representatives.by_cluster[k] == j)
                    .collect(),
                content: dataset.solutions[j].content.clone(),
            })
            .collect()
    }

    /// Similarity graph with this analysis' clusters and representatives.
    pub fn graph(&self, prep: &Prepared, grades: &[Option<f64>], threshold: f64) -> Result<GraphExport, IoError> {
        export_graph(&prep.s, &prep.ids, &self.assignment, grades, &self.to_grade(), threshold)
    }

    pub fn representative_ids(&self) -> Vec<String> {
        self.to_grade().into_iter().map(|j| self.ids[j].clone()).collect()
    }

    /// Checks an id-keyed grade map and turns it into per-cluster grades.
    /// A representative shared by several clusters is graded once.
    pub fn cluster_grades(&self, by_id: &BTreeMap<String, f64>) -> Result<BTreeMap<usize, f64>, AnalysisError> {
        let reps = self.to_grade();
        for (id, &g) in by_id {
            let j = self.ids.iter().position(|x| x == id).ok_or_else(|| AnalysisError::UnknownSolution(id.clone()))?;
            if !reps.contains(&j) {
                return Err(AnalysisError::NotRepresentative(id.clone()));
            }
            if !(g.is_finite() && (0.0..=self.g_max).contains(&g)) {
                return Err(AnalysisError::GradeOutOfRange { id: id.clone(), grade: g, g_max: self.g_max });
            }
        }
        self.representatives
            .by_cluster
            .iter()
            .enumerate()
            .map(|(k, &j)| {
                let id = &self.ids[j];
                by_id.get(id).map(|&g| (k, g)).ok_or_else(|| AnalysisError::MissingGrade(id.clone()))
            })
            .collect()
    }

    pub fn grade(&self, prep: &Prepared, by_id: &BTreeMap<String, f64>) -> Result<GradeReport, AnalysisError> {
        let cluster_grades = self.cluster_grades(by_id)?;
        let reps = self.to_grade();
        let mut grades = match self.method {
            Method::Sc | Method::Ap => propagate_grades_s(&self.assignment, &cluster_grades)?,
            Method::Bayes => {
                let phi = &self.bayes.as_ref().expect("bayes analysis").summary.phi_hat;
                grade_all_b(&prep.y, phi, &cluster_grades)?
            }
        };
        for &j in &reps {
            grades[j] = by_id[&self.ids[j]];
        }
        let solutions = grades
            .iter()
            .enumerate()
            .map(|(j, &g)| SolutionGrade {
                id: self.ids[j].clone(),
                cluster: self.assignment.labels[j],
                grade: g,
                rounded: round_grade(g),
                instructor: reps.contains(&j),
            })
            .collect();
        Ok(GradeReport {
            method: self.method,
            g_max: self.g_max,
            cluster_grades: cluster_grades.into_values().collect(),
            shared_representatives: self.shared_representatives.clone(),
            solutions,
        })
    }

    /// Stepwise expected grade for one solution; Bayesian analyses only.
    pub fn feedback(
        &self,
        prep: &Prepared,
        id: &str,
        by_id: &BTreeMap<String, f64>,
        epsilon: f64,
    ) -> Result<Option<FeedbackTrace>, AnalysisError> {
        let j = prep.index_of(id).ok_or_else(|| AnalysisError::UnknownSolution(id.to_owned()))?;
        let Some(b) = &self.bayes else {
            return Ok(None);
        };
        let cluster_grades = self.cluster_grades(by_id)?;
        Ok(Some(feedback_trace(&prep.solutions[j], &b.summary.phi_hat, &cluster_grades, self.g_max, epsilon)?))
    }
}
