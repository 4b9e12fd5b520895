use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::expr::SimplificationLevel;
use crate::features::{EncodingMode, RawSolution, SolutionContent};

use super::{from_json_str, to_json_bytes, write_atomic, IoError};

pub const SCHEMA_VERSION: u32 = 1;

fn default_g_max() -> f64 {
    3.0
}

/// On-disk dataset, version 1.
///
/// ```json
/// { "schema_version": 1, "question_id": "q1", "g_max": 3,
///   "solutions": [ { "id": "a", "body": "2x-3", "grade": 3 },
///                  { "id": "b", "expressions": ["x", "2x"] } ] }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFile {
    pub schema_version: u32,
    pub question_id: String,
    #[serde(default)]
    pub question: String,
    #[serde(default = "default_g_max")]
    pub g_max: f64,
    #[serde(default)]
    pub simplification: SimplificationLevel,
    #[serde(default)]
    pub encoding: EncodingMode,
    pub solutions: Vec<SolutionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub id: String,
    #[serde(flatten)]
    pub content: SolutionContent,
    /// Ground-truth grade, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grade: Option<f64>,
}

impl DatasetFile {
    pub fn new(question_id: impl Into<String>, solutions: Vec<SolutionRecord>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            question_id: question_id.into(),
            question: String::new(),
            g_max: default_g_max(),
            simplification: SimplificationLevel::default(),
            encoding: EncodingMode::default(),
            solutions,
        }
    }

    pub fn raw_solutions(&self) -> Vec<RawSolution> {
        self.solutions
            .iter()
            .map(|s| RawSolution { learner_id: s.id.clone(), content: s.content.clone() })
            .collect()
    }

    /// Ground-truth grades, if every solution has one.
    pub fn true_grades(&self) -> Option<Vec<f64>> {
        self.solutions.iter().map(|s| s.grade).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.solutions.iter().position(|s| s.id == id)
    }

    pub fn validate(&self) -> Result<(), IoError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(IoError::UnsupportedVersion(self.schema_version));
        }
        if !(self.g_max.is_finite() && self.g_max > 0.0) {
            return Err(IoError::Schema {
                field: "g_max".into(),
                message: format!("must be positive, got {}", self.g_max),
            });
        }
        let mut seen = HashSet::new();
        for s in &self.solutions {
            if !seen.insert(s.id.as_str()) {
                return Err(IoError::DuplicateId(s.id.clone()));
            }
            if let Some(g) = s.grade {
                if !(0.0..=self.g_max).contains(&g) {
                    return Err(IoError::GradeOutOfRange { id: s.id.clone(), grade: g, g_max: self.g_max });
                }
            }
        }
        Ok(())
    }

    /// Drops blank solutions, returning their ids.
    pub fn remove_blank(&mut self) -> Vec<String> {
        let mut removed = Vec::new();
        self.solutions.retain(|s| {
            let blank = s.content.is_blank();
            if blank {
                removed.push(s.id.clone());
            }
            !blank
        });
        removed
    }

    pub fn to_json_bytes(&self) -> Vec<u8> {
        to_json_bytes(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDataset {
    pub dataset: DatasetFile,
    /// Ids of blank solutions that were dropped.
    pub filtered: Vec<String>,
}

/// Parse, validate and drop blank solutions.
pub fn parse_dataset(text: &str) -> Result<LoadedDataset, IoError> {
    let mut dataset: DatasetFile = from_json_str(text)?;
    dataset.validate()?;
    let filtered = dataset.remove_blank();
    if !filtered.is_empty() {
        log::info!("filtered {} blank solutions", filtered.len());
    }
    Ok(LoadedDataset { dataset, filtered })
}

pub fn load_dataset(path: &Path) -> Result<LoadedDataset, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_dataset(&text)
}

pub fn save_dataset(path: &Path, dataset: &DatasetFile) -> Result<(), IoError> {
    write_atomic(path, &dataset.to_json_bytes())
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    id: String,
    body: String,
    #[serde(default)]
    grade: Option<f64>,
}

/// Reads `id,body[,grade]` rows (header required, extra columns ignored)
/// into a dataset with free-text bodies.
pub fn import_csv<R: Read>(reader: R, question_id: &str) -> Result<DatasetFile, IoError> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::Fields).from_reader(reader);
    let mut solutions = Vec::new();
    for row in rdr.deserialize() {
        let row: CsvRow = row?;
        solutions.push(SolutionRecord {
            id: row.id,
            content: SolutionContent::Body(row.body),
            grade: row.grade,
        });
    }
    let ds = DatasetFile::new(question_id, solutions);
    ds.validate()?;
    Ok(ds)
}
