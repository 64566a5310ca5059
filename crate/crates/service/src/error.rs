use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use chrono::{DateTime, SecondsFormat, Utc};
use serde_json::json;

use crate::quota::Endpoint;

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("missing or unknown API key")]
    UnknownKey,
    #[error("{field}: {message}")]
    BadRequest { field: String, message: String },
    #[error(
        "daily quota of {limit} exhausted ({used} used, {requested} requested); resets at {reset}"
    )]
    QuotaExhausted {
        endpoint: Endpoint,
        limit: u64,
        used: u64,
        requested: u64,
        reset: DateTime<Utc>,
        retry_after: i64,
    },
    #[error("models are not loaded")]
    NotReady,
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] botscope::Error),
    #[error("{0}")]
    Internal(String),
}

impl ServiceError {
    pub fn bad_request(field: impl Into<String>, message: impl Into<String>) -> Self {
        ServiceError::BadRequest {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn status(&self) -> StatusCode {
        match self {
            ServiceError::UnknownKey => StatusCode::UNAUTHORIZED,
            ServiceError::BadRequest { .. } => StatusCode::BAD_REQUEST,
            ServiceError::QuotaExhausted { .. } => StatusCode::TOO_MANY_REQUESTS,
            ServiceError::NotReady => StatusCode::SERVICE_UNAVAILABLE,
            ServiceError::Config(_) | ServiceError::Model(_) | ServiceError::Internal(_) => {
                StatusCode::INTERNAL_SERVER_ERROR
            }
        }
    }
}

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = self.status();
        let mut body = json!({ "error": self.to_string() });
        let mut retry_after = None;
        match &self {
            ServiceError::BadRequest { field, .. } => body["field"] = json!(field),
            ServiceError::QuotaExhausted {
                endpoint,
                limit,
                reset,
                retry_after: secs,
                ..
            } => {
                body["endpoint"] = json!(endpoint);
                body["limit"] = json!(limit);
                body["reset"] = json!(reset.to_rfc3339_opts(SecondsFormat::Secs, true));
                retry_after = Some((*secs).max(0));
            }
            _ => {}
        }
        let mut response = (status, Json(body)).into_response();
        if let Some(secs) = retry_after {
            response
                .headers_mut()
                .insert(header::RETRY_AFTER, HeaderValue::from(secs));
        }
        response
    }
}
