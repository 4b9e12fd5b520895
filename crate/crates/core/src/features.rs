//! Bag-of-expressions featurization.
//!
//! Every distinct canonical key across a corpus becomes one row of the
//! feature matrix `Y`; every solution is one column. In binary mode
//! `Y[i][j] = 1` when expression `i` appears in solution `j`.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::expr::{feature_key, tokenize_solution, SimplificationLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncodingMode {
    #[default]
    Binary,
    Counts,
}

/// What a learner submitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionContent {
    /// Free text mixing prose and math.
    Body(String),
    /// Expressions already split out, in order.
    Expressions(Vec<String>),
    /// Canonical keys, used verbatim (synthetic corpora).
    Keys(Vec<String>),
}

impl SolutionContent {
    pub fn is_blank(&self) -> bool {
        match self {
            SolutionContent::Body(b) => tokenize_solution(b).is_err(),
            SolutionContent::Expressions(es) | SolutionContent::Keys(es) => {
                es.iter().all(|e| e.trim().is_empty())
            }
        }
    }

    /// Ordered feature keys for this solution; `None` when blank.
    pub fn keys(&self, level: SimplificationLevel) -> Option<Vec<String>> {
        let keys: Vec<String> = match self {
            SolutionContent::Body(b) => tokenize_solution(b)
                .ok()?
                .iter()
                .map(|s| feature_key(s, level))
                .collect(),
            SolutionContent::Expressions(es) => es
                .iter()
                .filter(|e| !e.trim().is_empty())
                .map(|s| feature_key(s, level))
                .collect(),
            SolutionContent::Keys(ks) => {
                ks.iter().filter(|k| !k.trim().is_empty()).cloned().collect()
            }
        };
        (!keys.is_empty()).then_some(keys)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSolution {
    pub learner_id: String,
    pub content: SolutionContent,
}

impl RawSolution {
    pub fn text(learner_id: impl Into<String>, body: impl Into<String>) -> Self {
        Self { learner_id: learner_id.into(), content: SolutionContent::Body(body.into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FeatureError {
    #[error("corpus has no solutions")]
    EmptyCorpus,
    #[error("every solution in the corpus is blank")]
    AllBlank,
    #[error("solution `{0}` is blank; filter blanks before featurizing")]
    BlankSolution(String),
    #[error("prefix length {v} out of range 1..={len}")]
    IndexOutOfRange { v: usize, len: usize },
}

/// Sparse column over the vocabulary; entries sorted by row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub dim: usize,
    pub entries: Vec<(usize, u32)>,
}

impl FeatureVector {
    pub fn from_rows(dim: usize, rows: impl IntoIterator<Item = usize>, mode: EncodingMode) -> Self {
        let mut counts: Vec<(usize, u32)> = Vec::new();
        let mut sorted: Vec<usize> = rows.into_iter().collect();
        sorted.sort_unstable();
        for r in sorted {
            match counts.last_mut() {
                Some((last, c)) if *last == r => {
                    if mode == EncodingMode::Counts {
                        *c += 1;
                    }
                }
                _ => counts.push((r, 1)),
            }
        }
        Self { dim, entries: counts }
    }

    pub fn from_dense(values: &[u32]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(i, &v)| (i, v))
            .collect();
        Self { dim: values.len(), entries }
    }

    pub fn to_dense(&self) -> Vec<u32> {
        let mut out = vec![0; self.dim];
        for &(i, c) in &self.entries {
            out[i] = c;
        }
        out
    }

    pub fn get(&self, row: usize) -> u32 {
        self.entries
            .binary_search_by_key(&row, |e| e.0)
            .map(|k| self.entries[k].1)
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all entries.
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.1 as u64).sum()
    }

    pub fn dot(&self, other: &FeatureVector) -> u64 {
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        let mut acc = 0u64;
        while let (Some(&&(ra, ca)), Some(&&(rb, cb))) = (a.peek(), b.peek()) {
            match ra.cmp(&rb) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    acc += ca as u64 * cb as u64;
                    a.next();
                    b.next();
                }
            }
        }
        acc
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.0)
    }
}

/// One solution's ordered expression keys, kept for prefix vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionFeatures {
    pub learner_id: String,
    /// Keys in order of appearance, duplicates retained.
    pub keys: Vec<String>,
    /// Vocabulary row of each entry of `keys`.
    pub rows: Vec<usize>,
    pub distinct: BTreeSet<usize>,
    pub vocab_size: usize,
    pub mode: EncodingMode,
}

impl SolutionFeatures {
    /// Number of expressions `V_j`.
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// Feature vector of the first `v` expressions.
    pub fn prefix_vector(&self, v: usize) -> Result<FeatureVector, FeatureError> {
        if v == 0 || v > self.len() {
            return Err(FeatureError::IndexOutOfRange { v, len: self.len() });
        }
        Ok(FeatureVector::from_rows(self.vocab_size, self.rows[..v].iter().copied(), self.mode))
    }

    pub fn vector(&self) -> FeatureVector {
        FeatureVector::from_rows(self.vocab_size, self.rows.iter().copied(), self.mode)
    }
}

/// Vocabulary plus the `V × N` matrix `Y`, stored column-wise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub vocabulary: Vec<String>,
    pub columns: Vec<FeatureVector>,
    pub mode: EncodingMode,
}

impl FeatureMatrix {
    /// Build from already-computed key sequences (one per solution).
    pub fn from_key_sequences(
        sequences: Vec<(String, Vec<String>)>,
        mode: EncodingMode,
    ) -> Result<(Self, Vec<SolutionFeatures>), FeatureError> {
        if sequences.is_empty() {
            return Err(FeatureError::EmptyCorpus);
        }
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut vocabulary = Vec::new();
        let mut rows_per_solution = Vec::with_capacity(sequences.len());
        for (_, keys) in &sequences {
            let rows: Vec<usize> = keys
                .iter()
                .map(|k| {
                    *index.entry(k.clone()).or_insert_with(|| {
                        vocabulary.push(k.clone());
                        vocabulary.len() - 1
                    })
                })
                .collect();
            rows_per_solution.push(rows);
        }
        let v = vocabulary.len();
        let mut columns = Vec::with_capacity(sequences.len());
        let mut solutions = Vec::with_capacity(sequences.len());
        for ((learner_id, keys), rows) in sequences.into_iter().zip(rows_per_solution) {
            columns.push(FeatureVector::from_rows(v, rows.iter().copied(), mode));
            solutions.push(SolutionFeatures {
                learner_id,
                keys,
                distinct: rows.iter().copied().collect(),
                rows,
                vocab_size: v,
                mode,
            });
        }
        Ok((Self { vocabulary, columns, mode }, solutions))
    }

    pub fn n_features(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn n_solutions(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &FeatureVector {
        &self.columns[j]
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.columns[col].get(row)
    }

    /// Dense `V × N` view, row-major.
    pub fn to_dense_rows(&self) -> Vec<Vec<u32>> {
        let mut rows = vec![vec![0; self.n_solutions()]; self.n_features()];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, c) in &col.entries {
                rows[i][j] = c;
            }
        }
        rows
    }

    pub fn row_of(&self, key: &str) -> Option<usize> {
        self.vocabulary.iter().position(|k| k == key)
    }
}

pub fn build_matrix(
    solutions: &[RawSolution],
    level: SimplificationLevel,
    mode: EncodingMode,
) -> Result<(FeatureMatrix, Vec<SolutionFeatures>), FeatureError> {
    if solutions.is_empty() {
        return Err(FeatureError::EmptyCorpus);
    }
    let keyed: Vec<_> = solutions.iter().map(|s| s.content.keys(level)).collect();
    if keyed.iter().all(Option::is_none) {
        return Err(FeatureError::AllBlank);
    }
    let mut sequences = Vec::with_capacity(solutions.len());
    for (sol, keys) in solutions.iter().zip(keyed) {
        let keys = keys.ok_or_else(|| FeatureError::BlankSolution(sol.learner_id.clone()))?;
        sequences.push((sol.learner_id.clone(), keys));
    }
    FeatureMatrix::from_key_sequences(sequences, mode)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LEVEL: SimplificationLevel = SimplificationLevel::ArithmeticOnly;

    #[test]
    fn repeated_expression_is_single_one() {
        let sols = vec![RawSolution::text("a", "x + 1 = x + 1 = 1 + x")];
        let (y, feats) = build_matrix(&sols, LEVEL, EncodingMode::Binary).unwrap();
        assert_eq!(y.n_features(), 1);
        assert_eq!(y.column(0).entries, vec![(0, 1)]);
        assert_eq!(feats[0].len(), 3);

        let (yc, _) = build_matrix(&sols, LEVEL, EncodingMode::Counts).unwrap();
        assert_eq!(yc.column(0).entries, vec![(0, 3)]);
    }

    #[test]
    fn equivalent_notations_share_a_row() {
        let sols = vec![RawSolution::text("a", "1/e^x"), RawSolution::text("b", "e^(-x)")];
        let (y, _) = build_matrix(&sols, LEVEL, EncodingMode::Binary).unwrap();
        assert_eq!(y.n_features(), 1);
        assert_eq!(y.get(0, 0), 1);
        assert_eq!(y.get(0, 1), 1);
    }

    #[test]
    fn unparseable_segments_become_opaque_features() {
        let sols = vec![RawSolution::text("a", "x + = 2 )(")];
        let (y, _) = build_matrix(&sols, LEVEL, EncodingMode::Binary).unwrap();
        assert!(y.vocabulary.iter().any(|k| k.starts_with("(raw ")));
    }

    #[test]
    fn prefix_vectors() {
        let sols = vec![RawSolution::text("a", "a = b = a = c")];
        let (y, feats) = build_matrix(&sols, LEVEL, EncodingMode::Binary).unwrap();
        let s = &feats[0];
        assert_eq!(s.prefix_vector(1).unwrap().entries, vec![(0, 1)]);
        assert_eq!(s.prefix_vector(3).unwrap().entries, vec![(0, 1), (1, 1)]);
        assert_eq!(&s.prefix_vector(4).unwrap(), y.column(0));
        assert_eq!(s.prefix_vector(0), Err(FeatureError::IndexOutOfRange { v: 0, len: 4 }));
        assert!(s.prefix_vector(5).is_err());
    }

    #[test]
    fn errors() {
        assert_eq!(build_matrix(&[], LEVEL, EncodingMode::Binary), Err(FeatureError::EmptyCorpus));
        let blank = vec![RawSolution::text("a", "  "), RawSolution::text("b", "no math here")];
        assert_eq!(build_matrix(&blank, LEVEL, EncodingMode::Binary), Err(FeatureError::AllBlank));
        let mixed = vec![RawSolution::text("a", "x"), RawSolution::text("b", " ")];
        assert_eq!(
            build_matrix(&mixed, LEVEL, EncodingMode::Binary),
            Err(FeatureError::BlankSolution("b".into()))
        );
    }

    #[test]
    fn dot_products() {
        let a = FeatureVector::from_dense(&[1, 0, 2, 1]);
        let b = FeatureVector::from_dense(&[0, 3, 1, 1]);
        assert_eq!(a.dot(&b), 3);
        assert_eq!(a.dot(&a), 6);
        assert_eq!(a.total(), 4);
    }
}
