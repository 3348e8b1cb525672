use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use pitchfit_core::Error as CoreError;

/// Error body shared by the CLI and the HTTP API.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceError {
    pub error: String,
    #[serde(default)]
    pub field: Option<String>,
    pub message: String,
}

impl ServiceError {
    pub fn new(error: &str, field: Option<String>, message: impl Into<String>) -> Self {
        ServiceError {
            error: error.to_string(),
            field,
            message: message.into(),
        }
    }

    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self::new("validation", Some(field.into()), message)
    }

    pub fn not_found(what: impl Into<String>) -> Self {
        Self::new("not_found", None, what)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new("io", None, message)
    }

    pub fn status(&self) -> StatusCode {
        match self.error.as_str() {
            "not_found" => StatusCode::NOT_FOUND,
            "shape_mismatch" => StatusCode::UNPROCESSABLE_ENTITY,
            "io" => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        }
    }
}

impl std::fmt::Display for ServiceError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.field {
            Some(field) => write!(f, "{}: `{}`: {}", self.error, field, self.message),
            None => write!(f, "{}: {}", self.error, self.message),
        }
    }
}

impl std::error::Error for ServiceError {}

impl From<CoreError> for ServiceError {
    fn from(err: CoreError) -> Self {
        let kind = match err {
            CoreError::ShapeMismatch | CoreError::MissingOpponent(_) => "shape_mismatch",
            CoreError::Io(_) => "io",
            _ => "validation",
        };
        ServiceError::new(kind, err.field_name(), err.to_string())
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        (self.status(), Json(self)).into_response()
    }
}

/// Parses JSON, reporting the path of the offending field on failure.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, ServiceError> {
    let mut de = serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let field = (path != ".").then_some(path);
        ServiceError::new("validation", field, err.into_inner().to_string())
    })
}
