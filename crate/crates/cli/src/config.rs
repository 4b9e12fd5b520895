//! TOML defaults for every flag. Keys are the long flag names with `_` for
//! `-`; a flag given on the command line overrides the file.
//!
//! ```toml
//! dataset = "fixtures/question1.json"
//! method = "bayes"
//! seed = 3
//! k_range = "5..20"
//!
//! [gibbs]
//! iterations = 4000
//! burn_in = 1000
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use mlp_core::mlp_s::ApConfig;
use mlp_core::ModelHyperparams;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub dataset: Option<PathBuf>,
    pub analysis: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub level: Option<String>,
    pub method: Option<String>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub grades: Option<PathBuf>,
    pub solution: Option<String>,
    pub epsilon: Option<f64>,
    pub threshold: Option<f64>,
    pub methods: Option<String>,
    pub k_range: Option<String>,
    pub seeds: Option<String>,
    pub rs_trials: Option<usize>,
    pub format: Option<String>,
    pub timing: Option<bool>,
    pub synthetic: Option<bool>,
    pub n: Option<usize>,
    pub v: Option<usize>,
    pub k_star: Option<usize>,
    pub overlap: Option<f64>,
    pub noise: Option<f64>,
    pub synth_seed: Option<u64>,
    pub host: Option<String>,
    pub port: Option<u16>,
    pub gibbs: Option<ModelHyperparams>,
    pub ap: Option<ApConfig>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
    }
}
