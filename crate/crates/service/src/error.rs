use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use serde::Serialize;

use mlp_core::io::IoError;
use mlp_core::AnalysisError;

/// Error body: `{"error": "...", "field": "..."}`.
#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[error("{message}")]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    #[serde(rename = "error")]
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ApiError {
    pub fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self { status: status.as_u16(), message: message.into(), field: None }
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, message)
    }

    pub fn conflict(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, message)
    }

    pub fn unprocessable(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, message)
    }

    /// Schema problems inside the posted dataset; `prefix` locates it in
    /// the request body.
    pub fn from_io(err: IoError, prefix: &str) -> Self {
        match err {
            IoError::Schema { field, message } => {
                let field = if field.is_empty() || field == "." { prefix.to_owned() } else { format!("{prefix}.{field}") };
                Self { field: Some(field), ..Self::bad_request(message) }
            }
            other => Self::bad_request(other.to_string()),
        }
    }
}

impl From<AnalysisError> for ApiError {
    fn from(err: AnalysisError) -> Self {
        let status = match &err {
            AnalysisError::MissingGrade(_) => StatusCode::CONFLICT,
            e if e.is_input_error() => StatusCode::BAD_REQUEST,
            AnalysisError::GradeOutOfRange { .. } | AnalysisError::Model(_) | AnalysisError::Cluster(_) => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            AnalysisError::NotRepresentative(_) | AnalysisError::UnknownSolution(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        Self::new(status, err.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        crate::json_response(status, &self)
    }
}
