//! Dataset files, graph export and atomic persistence.

mod dataset;
mod graph;

use std::path::{Path, PathBuf};

pub use dataset::{
    import_csv, load_dataset, parse_dataset, save_dataset, DatasetFile, LoadedDataset,
    SolutionRecord, SCHEMA_VERSION,
};
pub use graph::{export_graph, GraphEdge, GraphExport, GraphNode};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("schema error at `{field}`: {message}")]
    Schema { field: String, message: String },
    #[error("unsupported schema version {0}")]
    UnsupportedVersion(u32),
    #[error("duplicate solution id `{0}`")]
    DuplicateId(String),
    #[error("grade {grade} of `{id}` outside [0, {g_max}]")]
    GradeOutOfRange { id: String, grade: f64, g_max: f64 },
    #[error("threshold {0} outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl IoError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.to_owned(), source }
    }

    /// True for errors caused by the file's content rather than the file
    /// system.
    pub fn is_schema(&self) -> bool {
        !matches!(self, IoError::Io { .. })
    }
}

/// Write via a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| IoError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| IoError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| IoError::io(path, e))?;
    tmp.persist(path).map_err(|e| IoError::io(path, e.error))?;
    Ok(())
}

/// Pretty JSON with a trailing newline, written atomically.
pub fn save_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_atomic(path, to_json_bytes(value).as_slice())
}

pub fn to_json_bytes<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("serializable");
    out.push(b'\n');
    out
}

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    from_json_str(&text)
}

/// Deserialize, reporting the field path of the first error.
pub fn from_json_str<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| IoError::Schema {
        field: e.path().to_string(),
        message: e.into_inner().to_string(),
    })
}
