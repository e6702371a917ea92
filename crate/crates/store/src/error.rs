use mrpp_core::preference::ProfileError;
use mrpp_core::{ParseErrors, ValidationReport};
use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("policy document does not parse")]
    Parse(ParseErrors),
    #[error("document party {body} does not match request party {path}")]
    PartyMismatch { path: String, body: String },
    #[error("policy fails validation")]
    Validation(ValidationReport),
    #[error("declared version {declared}, expected {expected}")]
    VersionConflict { expected: i64, declared: i64 },
    #[error("{0}")]
    NotFound(String),
    #[error("unknown app {0}")]
    UnknownApp(String),
    #[error("unknown profile {0}")]
    UnknownProfile(String),
    #[error("{party} is not reachable from app {app_id}")]
    Unreachable { app_id: String, party: String },
    #[error("invalid profile: {0}")]
    InvalidProfile(#[from] ProfileError),
    #[error("invalid breach event: {0}")]
    InvalidEvent(String),
    #[error("invalid app record: {0}")]
    InvalidApp(String),
    #[error("{0}")]
    BadRequest(String),
    #[error("storage error: {0}")]
    Io(#[from] std::io::Error),
    #[error("data directory is inconsistent: {0}")]
    Corrupt(String),
}

impl StoreError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            StoreError::Parse(_) => "parse-failure",
            StoreError::PartyMismatch { .. } => "party-mismatch",
            StoreError::Validation(_) => "validation-failure",
            StoreError::VersionConflict { .. } => "version-conflict",
            StoreError::NotFound(_) => "not-found",
            StoreError::UnknownApp(_) => "unknown-app",
            StoreError::UnknownProfile(_) => "unknown-profile",
            StoreError::Unreachable { .. } => "unreachable",
            StoreError::InvalidProfile(_) => "invalid-profile",
            StoreError::InvalidEvent(_) => "invalid-event",
            StoreError::InvalidApp(_) => "invalid-app",
            StoreError::BadRequest(_) => "bad-request",
            StoreError::Io(_) => "storage-error",
            StoreError::Corrupt(_) => "corrupt-data",
        }
    }

    pub fn http_status(&self) -> u16 {
        match self {
            StoreError::Parse(_)
            | StoreError::PartyMismatch { .. }
            | StoreError::InvalidProfile(_)
            | StoreError::InvalidEvent(_)
            | StoreError::InvalidApp(_)
            | StoreError::BadRequest(_) => 400,
            StoreError::NotFound(_)
            | StoreError::UnknownApp(_)
            | StoreError::UnknownProfile(_)
            | StoreError::Unreachable { .. } => 404,
            StoreError::VersionConflict { .. } => 409,
            StoreError::Validation(_) => 422,
            StoreError::Io(_) | StoreError::Corrupt(_) => 500,
        }
    }

    pub fn details(&self) -> Value {
        match self {
            StoreError::Parse(errors) => json!({
                "errors": errors.0.iter().map(|e| json!({
                    "kind": e.kind.as_str(),
                    "message": e.message,
                    "locator": e.locator(),
                })).collect::<Vec<_>>()
            }),
            StoreError::PartyMismatch { path, body } => json!({ "request_party": path, "document_party": body }),
            StoreError::Validation(report) => json!({ "errors": report.errors, "warnings": report.warnings }),
            StoreError::VersionConflict { expected, declared } => json!({ "expected": expected, "declared": declared }),
            StoreError::UnknownApp(id) => json!({ "app_id": id }),
            StoreError::UnknownProfile(id) => json!({ "profile_id": id }),
            StoreError::Unreachable { app_id, party } => json!({ "app_id": app_id, "party": party }),
            _ => json!({}),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "code": self.code(), "message": self.to_string(), "details": self.details() })
    }
}
