use std::collections::BTreeSet;

use super::EvalError;

/// Mean absolute error over the solutions not in `graded`.
pub fn mae(estimated: &[f64], actual: &[f64], graded: &BTreeSet<usize>) -> Result<f64, EvalError> {
    assert_eq!(estimated.len(), actual.len(), "grade vectors differ in length");
    let auto: Vec<usize> = (0..actual.len()).filter(|j| !graded.contains(j)).collect();
    if auto.is_empty() {
        return Err(EvalError::EmptyAutoGradedSet);
    }
    let total: f64 = auto.iter().map(|&j| (estimated[j] - actual[j]).abs()).sum();
    Ok(total / auto.len() as f64)
}

/// Hands out true grades one solution at a time and remembers which were
/// revealed, so a run can be audited for how many it consumed.
#[derive(Debug)]
pub struct GradeOracle<'a> {
    truth: &'a [f64],
    revealed: BTreeSet<usize>,
}

impl<'a> GradeOracle<'a> {
    pub fn new(truth: &'a [f64]) -> Self {
        Self { truth, revealed: BTreeSet::new() }
    }

    pub fn reveal(&mut self, j: usize) -> f64 {
        self.revealed.insert(j);
        self.truth[j]
    }

    pub fn revealed(&self) -> &BTreeSet<usize> {
        &self.revealed
    }

    pub fn count(&self) -> usize {
        self.revealed.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mae_examples() {
        let truth = [3.0, 2.0, 1.0, 0.0, 3.0];
        let none = BTreeSet::new();
        assert_eq!(mae(&truth, &truth, &none).unwrap(), 0.0);
        let est = [3.0, 3.0, 1.0, 1.0, 0.0];
        // graded: 4; auto-graded 0..4 with two errors of 1
        assert_eq!(mae(&est, &truth, &BTreeSet::from([4])).unwrap(), 0.5);
        assert_eq!(mae(&est, &truth, &(0..5).collect()), Err(EvalError::EmptyAutoGradedSet));
    }

    #[test]
    fn oracle_counts_distinct_reveals() {
        let t = [1.0, 2.0];
        let mut o = GradeOracle::new(&t);
        assert_eq!(o.reveal(1), 2.0);
        o.reveal(1);
        assert_eq!(o.count(), 1);
    }
}
