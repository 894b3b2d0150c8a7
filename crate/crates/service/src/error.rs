use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use metaforge::llm::PromptError;
use metaforge::pipeline::PipelineError;
use metaforge::Violation;
use serde::Serialize;

use crate::store::StoreError;

#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub error: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<Violation>,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, error: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: ErrorBody {
                error,
                message: message.into(),
                violations: Vec::new(),
            },
        }
    }

    pub fn not_found(id: &str) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not-found", format!("no session `{id}`"))
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad-request", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let message = e.to_string();
        match e {
            PipelineError::Gateway(_) => ApiError::new(StatusCode::BAD_GATEWAY, "gateway", message),
            PipelineError::Unusable { .. } => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "unusable-output", message),
            PipelineError::Merge(m) => {
                let mut err = ApiError::new(StatusCode::CONFLICT, "merge-conflict", message);
                err.body.violations = m.violations().to_vec();
                err
            }
            PipelineError::Requirements(_)
            | PipelineError::EmptyRequirements
            | PipelineError::CreationStep
            | PipelineError::Prompt(PromptError::EmptyRequirements) => ApiError::bad_request(message),
            PipelineError::Prompt(_) | PipelineError::Current(_) => ApiError::internal(message),
        }
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        ApiError::internal(e.to_string())
    }
}
