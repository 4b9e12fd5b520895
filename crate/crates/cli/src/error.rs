use mlp_core::eval::EvalError;
use mlp_core::io::IoError;
use mlp_core::AnalysisError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed input: dataset, grades file, config or flag values.
    #[error("{0}")]
    Schema(String),
    /// The model could not produce a result.
    #[error("{0}")]
    Model(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Model(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        if e.is_schema() {
            CliError::Schema(e.to_string())
        } else {
            CliError::Io(e.to_string())
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            e if e.is_input_error() => CliError::Schema(e.to_string()),
            AnalysisError::Model(_) | AnalysisError::Cluster(_) => CliError::Model(e.to_string()),
            _ => CliError::Schema(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Analysis(a) => a.into(),
            EvalError::InvalidSpec(_) | EvalError::MissingTruth | EvalError::InvalidK { .. } => {
                CliError::Schema(e.to_string())
            }
            EvalError::EmptyAutoGradedSet | EvalError::GradeBudgetExceeded { .. } => CliError::Model(e.to_string()),
        }
    }
}
