//! MAE-vs-K sweeps over the grading methods.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, AnalysisParams, Method, Prepared};
use crate::mlp_b::ModelHyperparams;
use crate::mlp_s::ApConfig;

use super::baseline::random_baseline;
use super::metrics::{mae, GradeOracle};
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalMethod {
    Rs,
    Sc,
    Ap,
    Bayes,
}

impl EvalMethod {
    pub const ALL: [EvalMethod; 4] = [EvalMethod::Rs, EvalMethod::Sc, EvalMethod::Ap, EvalMethod::Bayes];

    pub fn label(self) -> &'static str {
        match self {
            EvalMethod::Rs => "RS",
            EvalMethod::Sc => Method::Sc.label(),
            EvalMethod::Ap => Method::Ap.label(),
            EvalMethod::Bayes => Method::Bayes.label(),
        }
    }

    fn analysis_method(self) -> Option<Method> {
        match self {
            EvalMethod::Rs => None,
            EvalMethod::Sc => Some(Method::Sc),
            EvalMethod::Ap => Some(Method::Ap),
            EvalMethod::Bayes => Some(Method::Bayes),
        }
    }
}

impl fmt::Display for EvalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalMethod::Rs => f.write_str("rs"),
            m => m.analysis_method().unwrap().fmt(f),
        }
    }
}

impl FromStr for EvalMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rs" | "random" => Ok(EvalMethod::Rs),
            other => other.parse::<Method>().map(|m| match m {
                Method::Sc => EvalMethod::Sc,
                Method::Ap => EvalMethod::Ap,
                Method::Bayes => EvalMethod::Bayes,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub methods: Vec<EvalMethod>,
    /// Graded-solution counts swept for RS and spectral clustering.
    pub k_range: RangeInclusive<usize>,
    pub seeds: Vec<u64>,
    pub rs_trials: usize,
    pub ap: ApConfig,
    pub gibbs: ModelHyperparams,
    /// Record wall-clock seconds per cell. Off by default so that reports
    /// are byte-identical across runs.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            methods: EvalMethod::ALL.to_vec(),
            k_range: 5..=40,
            seeds: vec![0],
            rs_trials: 10,
            ap: ApConfig::default(),
            gibbs: ModelHyperparams::default(),
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub method: EvalMethod,
    pub seed: u64,
    /// Cluster count asked for; `None` when the method chooses it.
    pub k_requested: Option<usize>,
    pub k: usize,
    /// Distinct solutions whose true grade was revealed.
    pub n_graded: usize,
    pub n_auto: usize,
    pub mae: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub n: usize,
    pub v: usize,
    pub rows: Vec<ExperimentRow>,
}

/// Grades every solution with one method, revealing only representative
/// grades through the oracle. Returns the row plus the grade vector.
fn run_cell(
    prep: &Prepared,
    truth: &[f64],
    method: Method,
    k: Option<usize>,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<(ExperimentRow, Vec<f64>), EvalError> {
    let params = AnalysisParams {
        method,
        k,
        seed,
        ap: cfg.ap.clone(),
        gibbs: cfg.gibbs.clone(),
        ..AnalysisParams::default()
    };
    let analysis = analyze(prep, &params)?;
    let mut oracle = GradeOracle::new(truth);
    let by_id: BTreeMap<String, f64> =
        analysis.to_grade().into_iter().map(|j| (prep.ids[j].clone(), oracle.reveal(j))).collect();
    let report = analysis.grade(prep, &by_id)?;
    if oracle.count() > analysis.assignment.k {
        return Err(EvalError::GradeBudgetExceeded { revealed: oracle.count(), k: analysis.assignment.k });
    }
    let estimated: Vec<f64> = report.solutions.iter().map(|s| s.rounded).collect();
    let graded: BTreeSet<usize> = oracle.revealed().clone();
    let m = mae(&estimated, truth, &graded)?;
    let row = ExperimentRow {
        method: match method {
            Method::Sc => EvalMethod::Sc,
            Method::Ap => EvalMethod::Ap,
            Method::Bayes => EvalMethod::Bayes,
        },
        seed,
        k_requested: k,
        k: analysis.assignment.k,
        n_graded: graded.len(),
        n_auto: truth.len() - graded.len(),
        mae: m,
        seconds: None,
    };
    Ok((row, estimated))
}

pub fn run_experiment(
    name: &str,
    prep: &Prepared,
    truth: &[f64],
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport, EvalError> {
    let n = prep.n();
    if truth.len() != n {
        return Err(EvalError::MissingTruth);
    }
    let (lo, hi) = (*cfg.k_range.start(), *cfg.k_range.end());
    let sweeps = cfg.methods.iter().any(|m| matches!(m, EvalMethod::Rs | EvalMethod::Sc));
    if sweeps && (lo < 2 || hi >= n || lo > hi) {
        return Err(EvalError::InvalidK { k: if lo < 2 { lo } else { hi }, n });
    }
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        for &method in &cfg.methods {
            let start = Instant::now();
            match method {
                EvalMethod::Rs => {
                    for k in cfg.k_range.clone() {
                        let t = Instant::now();
                        let r = random_baseline(&prep.s, k, truth, seed, cfg.rs_trials)?;
                        rows.push(ExperimentRow {
                            method,
                            seed,
                            k_requested: Some(k),
                            k,
                            n_graded: k,
                            n_auto: n - k,
                            mae: r.mae,
                            seconds: cfg.timing.then(|| t.elapsed().as_secs_f64()),
                        });
                    }
                }
                EvalMethod::Sc => {
                    for k in cfg.k_range.clone() {
                        let t = Instant::now();
                        let (mut row, _) = run_cell(prep, truth, Method::Sc, Some(k), seed, cfg)?;
                        row.seconds = cfg.timing.then(|| t.elapsed().as_secs_f64());
                        rows.push(row);
                    }
                }
                EvalMethod::Ap | EvalMethod::Bayes => {
                    let m = method.analysis_method().unwrap();
                    let (mut row, _) = run_cell(prep, truth, m, None, seed, cfg)?;
                    row.seconds = cfg.timing.then(|| start.elapsed().as_secs_f64());
                    rows.push(row);
                }
            }
        }
    }
    Ok(ExperimentReport { dataset: name.to_owned(), n, v: prep.y.n_features(), rows })
}

/// One method at one cluster count, for callers that need the grades.
pub fn grade_with(
    prep: &Prepared,
    truth: &[f64],
    method: Method,
    k: Option<usize>,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<(ExperimentRow, Vec<f64>), EvalError> {
    run_cell(prep, truth, method, k, seed, cfg)
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    /// Plot-ready long format.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,seed,k_requested,k,n_graded,n_auto,mae,seconds\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.method.label(),
                r.seed,
                r.k_requested.map(|k| k.to_string()).unwrap_or_default(),
                r.k,
                r.n_graded,
                r.n_auto,
                r.mae,
                r.seconds.map(|s| s.to_string()).unwrap_or_default(),
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("dataset {}  N = {}  V = {}\n", self.dataset, self.n, self.v);
        let _ = writeln!(out, "{:<10} {:>6} {:>5} {:>8} {:>6} {:>8}", "method", "seed", "K", "graded", "auto", "MAE");
        for r in &self.rows {
            let _ = write!(
                out,
                "{:<10} {:>6} {:>5} {:>8} {:>6} {:>8.4}",
                r.method.label(),
                r.seed,
                r.k,
                r.n_graded,
                r.n_auto,
                r.mae
            );
            if let Some(s) = r.seconds {
                let _ = write!(out, "  {s:.3}s");
            }
            out.push('\n');
        }
        out
    }

    pub fn rows_for(&self, method: EvalMethod) -> impl Iterator<Item = &ExperimentRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }
}
