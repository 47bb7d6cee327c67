use axum::extract::rejection::{JsonRejection, PathRejection, QueryRejection};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use latfuzz_core::{FuzzyError, InferenceError};
use serde::Serialize;

/// Seconds a client is asked to wait when the session table is full.
pub const RETRY_AFTER_SECS: u64 = 30;

/// JSON error body: `{"code", "message", "field"?, "universe"?}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub universe: Option<[f64; 2]>,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
            field: None,
            universe: None,
        }
    }

    pub fn invalid(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }

    pub fn with_field(mut self, field: impl Into<String>) -> Self {
        self.field = Some(field.into());
        self
    }

    pub fn unknown_session(id: &str) -> Self {
        Self::new(
            StatusCode::NOT_FOUND,
            "unknown-session",
            format!("no session `{id}`"),
        )
    }

    pub fn capacity(max_sessions: usize) -> Self {
        Self::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "capacity-exceeded",
            format!("all {max_sessions} session slots are in use; retry in {RETRY_AFTER_SECS} s"),
        )
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<InferenceError> for ApiError {
    fn from(err: InferenceError) -> Self {
        let message = err.to_string();
        match err {
            InferenceError::Fuzzy(FuzzyError::OutOfUniverse {
                variable, lo, hi, ..
            }) => Self {
                universe: Some([lo, hi]),
                ..Self::invalid("out-of-universe", message).with_field(variable)
            },
            InferenceError::Fuzzy(FuzzyError::MissingInput { attribute }) => {
                Self::invalid("missing-input", message).with_field(attribute)
            }
            InferenceError::Fuzzy(_) => Self::invalid("invalid-input", message),
            InferenceError::UnknownAttribute(attribute) => {
                Self::invalid("unknown-attribute", message).with_field(attribute)
            }
            InferenceError::AttributeNotInPhase { attribute, .. } => {
                Self::invalid("attribute-not-in-phase", message).with_field(attribute)
            }
            InferenceError::NoInputs { .. } => {
                Self::invalid("no-inputs", message).with_field("inputs")
            }
            InferenceError::PhaseOrder { .. } => {
                Self::new(StatusCode::CONFLICT, "phase-order", message)
            }
            InferenceError::UnknownPhase(_) => Self::invalid("unknown-phase", message),
            InferenceError::UnknownDisease(_) => {
                Self::invalid("unknown-disease", message).with_field("disease")
            }
            InferenceError::InvalidAxes(_) => Self::invalid("invalid-axes", message),
            InferenceError::InvalidResolution(_) => {
                Self::invalid("invalid-resolution", message).with_field("resolution")
            }
            InferenceError::NoPhases | InferenceError::PatientFile(_) => {
                Self::invalid("invalid-input", message)
            }
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rejection: JsonRejection) -> Self {
        let status = match rejection.status() {
            s if s.is_client_error() => s,
            _ => StatusCode::BAD_REQUEST,
        };
        Self::new(status, "invalid-body", rejection.body_text())
    }
}

impl From<PathRejection> for ApiError {
    fn from(rejection: PathRejection) -> Self {
        Self::new(
            StatusCode::BAD_REQUEST,
            "invalid-path",
            rejection.body_text(),
        )
    }
}

impl From<QueryRejection> for ApiError {
    fn from(rejection: QueryRejection) -> Self {
        Self::invalid("invalid-query", rejection.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = serde_json::to_string(&self).expect("errors serialize");
        let mut response = (
            self.status,
            [(header::CONTENT_TYPE, "application/json")],
            body,
        )
            .into_response();
        if self.status == StatusCode::SERVICE_UNAVAILABLE {
            response
                .headers_mut()
                .insert(header::RETRY_AFTER, HeaderValue::from(RETRY_AFTER_SECS));
        }
        response
    }
}
