//! Analysis sessions: an immutable snapshot of one clustering run plus an
//! append-only log of grade submissions.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};

use mlp_core::io::DatasetFile;
use mlp_core::{Analysis, AnalysisError, AnalysisParams, GradeReport, Method, Prepared};

use crate::error::ApiError;

/// Everything fixed when the analysis finished.
#[derive(Debug)]
pub struct Snapshot {
    pub dataset: DatasetFile,
    /// Ids of blank solutions dropped on load.
    pub filtered: Vec<String>,
    pub params: AnalysisParams,
    pub prep: Prepared,
    pub analysis: Analysis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: usize,
    pub grades: BTreeMap<String, f64>,
}

/// Accepted submissions in order, and the report of the latest one.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GradeBook {
    pub audit: Vec<AuditEntry>,
    pub current: Option<(BTreeMap<String, f64>, GradeReport)>,
}

impl GradeBook {
    /// Rebuilds a grade book from its audit log.
    pub fn replay(snapshot: &Snapshot, audit: &[AuditEntry]) -> Result<GradeBook, AnalysisError> {
        let mut book = GradeBook::default();
        for entry in audit {
            book.apply(snapshot, entry.grades.clone())?;
        }
        Ok(book)
    }

    fn apply(&mut self, snapshot: &Snapshot, grades: BTreeMap<String, f64>) -> Result<GradeReport, AnalysisError> {
        let report = snapshot.analysis.grade(&snapshot.prep, &grades)?;
        self.audit.push(AuditEntry { seq: self.audit.len() + 1, grades: grades.clone() });
        self.current = Some((grades, report.clone()));
        Ok(report)
    }
}

#[derive(Debug)]
pub struct Session {
    pub snapshot: Snapshot,
    book: Mutex<GradeBook>,
}

impl Session {
    pub fn new(snapshot: Snapshot) -> Self {
        Self { snapshot, book: Mutex::new(GradeBook::default()) }
    }

    /// Grades and, when accepted, appends to the audit log. Rejected
    /// submissions leave the book untouched.
    pub fn submit(&self, grades: BTreeMap<String, f64>) -> Result<GradeReport, AnalysisError> {
        let mut book = self.book.lock().unwrap_or_else(|e| e.into_inner());
        book.apply(&self.snapshot, grades)
    }

    pub fn book(&self) -> GradeBook {
        self.book.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }

    /// Grade shown on each graph node: the latest propagated grade if any
    /// submission was accepted, otherwise the dataset's own grade.
    pub fn node_grades(&self) -> Vec<Option<f64>> {
        match &self.book().current {
            Some((_, report)) => report.solutions.iter().map(|s| Some(s.grade)).collect(),
            None => self.snapshot.dataset.solutions.iter().map(|s| s.grade).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum State {
    Running,
    Ready,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Status {
    pub id: String,
    pub method: Method,
    pub state: State,
    /// Gibbs sweeps completed, or 0/1 for the similarity methods.
    pub done: usize,
    pub total: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug)]
enum Outcome {
    Running,
    Ready(Arc<Session>),
    Failed(ApiError),
}

#[derive(Debug)]
pub struct Slot {
    method: Method,
    done: AtomicUsize,
    total: AtomicUsize,
    outcome: RwLock<Outcome>,
}

impl Slot {
    fn new(method: Method, total: usize) -> Self {
        Self { method, done: AtomicUsize::new(0), total: AtomicUsize::new(total), outcome: RwLock::new(Outcome::Running) }
    }

    pub fn progress(&self, done: usize, total: usize) {
        self.done.store(done, Ordering::Relaxed);
        self.total.store(total, Ordering::Relaxed);
    }

    pub fn finish(&self, result: Result<Session, ApiError>) {
        let outcome = match result {
            Ok(s) => {
                self.done.store(self.total.load(Ordering::Relaxed), Ordering::Relaxed);
                Outcome::Ready(Arc::new(s))
            }
            Err(e) => Outcome::Failed(e),
        };
        *self.outcome.write().unwrap_or_else(|e| e.into_inner()) = outcome;
    }

    pub fn status(&self, id: &str) -> Status {
        let outcome = self.outcome.read().unwrap_or_else(|e| e.into_inner());
        let (state, error) = match &*outcome {
            Outcome::Running => (State::Running, None),
            Outcome::Ready(_) => (State::Ready, None),
            Outcome::Failed(e) => (State::Failed, Some(e.message.clone())),
        };
        Status {
            id: id.to_owned(),
            method: self.method,
            state,
            done: self.done.load(Ordering::Relaxed),
            total: self.total.load(Ordering::Relaxed),
            error,
        }
    }

    /// The finished session; 409 while running, the stored error if failed.
    pub fn session(&self) -> Result<Arc<Session>, ApiError> {
        match &*self.outcome.read().unwrap_or_else(|e| e.into_inner()) {
            Outcome::Running => Err(ApiError::conflict("analysis is still running")),
            Outcome::Ready(s) => Ok(s.clone()),
            Outcome::Failed(e) => Err(e.clone()),
        }
    }
}

/// All sessions of one server process.
#[derive(Debug, Default)]
pub struct Store {
    next: AtomicU64,
    slots: RwLock<HashMap<String, Arc<Slot>>>,
}

impl Store {
    pub fn open(&self, method: Method, total: usize) -> (String, Arc<Slot>) {
        let id = format!("a{}", self.next.fetch_add(1, Ordering::Relaxed) + 1);
        let slot = Arc::new(Slot::new(method, total));
        self.slots.write().unwrap_or_else(|e| e.into_inner()).insert(id.clone(), slot.clone());
        (id, slot)
    }

    pub fn get(&self, id: &str) -> Result<Arc<Slot>, ApiError> {
        self.slots
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("no analysis `{id}`")))
    }

    pub fn remove(&self, id: &str) {
        self.slots.write().unwrap_or_else(|e| e.into_inner()).remove(id);
    }
}
