use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use botscope::corpus::{AccountPayload, UserObject, MAX_TIMELINE};
use botscope::ensemble::{Calibration, EscModel};
use botscope::lite::LiteModel;

use crate::error::ServiceError;
use crate::quota::{Endpoint, QuotaBook};

pub const API_KEY_HEADER: &str = "x-api-key";

/// The three artifacts a running service scores with.
#[derive(Debug, Clone)]
pub struct Models {
    pub esc: EscModel,
    pub calibration: Calibration,
    pub lite: LiteModel,
}

impl Models {
    pub fn new(
        esc: EscModel,
        calibration: Calibration,
        lite: LiteModel,
    ) -> Result<Self, ServiceError> {
        esc.validate()?;
        calibration.check_model(&esc)?;
        lite.validate()?;
        if lite.registry.base_version() != esc.registry.base_version() {
            return Err(ServiceError::Config(format!(
                "lite model registry {} does not match {}",
                lite.registry.version, esc.registry.version
            )));
        }
        Ok(Models {
            esc,
            calibration,
            lite,
        })
    }

    pub fn load(model: &Path, calibration: &Path, lite: &Path) -> Result<Self, ServiceError> {
        let read = |p: &Path| {
            std::fs::read_to_string(p)
                .map_err(|e| ServiceError::Config(format!("reading {}: {e}", p.display())))
        };
        Self::new(
            EscModel::from_json(&read(model)?)?,
            Calibration::from_json(&read(calibration)?)?,
            LiteModel::from_json(&read(lite)?)?,
        )
    }
}

#[derive(Debug, Serialize)]
struct LogLine<'a> {
    time: String,
    endpoint: &'a str,
    key: String,
    status: u16,
    units: u64,
}

pub struct AppState {
    models: RwLock<Option<Arc<Models>>>,
    quotas: QuotaBook,
    page_size: usize,
    log: Option<Mutex<BufWriter<File>>>,
}

impl AppState {
    pub fn new(quotas: QuotaBook, page_size: usize) -> Self {
        AppState {
            models: RwLock::new(None),
            quotas,
            page_size,
            log: None,
        }
    }

    pub fn with_request_log(mut self, path: &Path) -> Result<Self, ServiceError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| ServiceError::Config(format!("opening {}: {e}", path.display())))?;
        self.log = Some(Mutex::new(BufWriter::new(file)));
        Ok(self)
    }

    /// Makes the service ready; until then scoring endpoints answer 503.
    pub fn install_models(&self, models: Models) {
        *self.models.write().unwrap() = Some(Arc::new(models));
    }

    pub fn models(&self) -> Result<Arc<Models>, ServiceError> {
        self.models
            .read()
            .unwrap()
            .clone()
            .ok_or(ServiceError::NotReady)
    }

    pub fn quotas(&self) -> &QuotaBook {
        &self.quotas
    }

    fn log(&self, endpoint: &str, key: Option<&str>, status: StatusCode, units: u64) {
        let Some(log) = &self.log else { return };
        // Only a key prefix is logged.
        let key = key.map_or_else(String::new, |k| {
            format!("{}…", k.chars().take(4).collect::<String>())
        });
        let line = LogLine {
            time: timestamp(self.quotas.now()),
            endpoint,
            key,
            status: status.as_u16(),
            units,
        };
        let mut w = log.lock().unwrap();
        let _ = serde_json::to_writer(&mut *w, &line);
        let _ = w.write_all(b"\n").and_then(|_| w.flush());
    }
}

fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/check_account", post(check_account))
        .route("/check_accounts_in_bulk", post(check_accounts_in_bulk))
        .route("/health", get(health))
        .layer(DefaultBodyLimit::max(64 * 1024 * 1024))
        .with_state(state)
}

fn api_key(headers: &HeaderMap) -> Option<&str> {
    headers.get(API_KEY_HEADER).and_then(|v| v.to_str().ok())
}

/// Deserializes `body`, reporting the path of the first offending field.
fn parse<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ServiceError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." {
            "body".to_string()
        } else {
            path
        };
        ServiceError::bad_request(field, e.inner().to_string())
    })
}

fn check_payload(p: &AccountPayload) -> Result<(), ServiceError> {
    if p.timeline.len() > MAX_TIMELINE {
        return Err(ServiceError::bad_request(
            "timeline",
            format!(
                "{} tweets, at most {MAX_TIMELINE} allowed",
                p.timeline.len()
            ),
        ));
    }
    p.validate()
        .map_err(|e| ServiceError::bad_request("payload", e.to_string()))
}

async fn check_account(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> Response {
    let key = api_key(&headers);
    let result = check_account_inner(&state, key, &body);
    let response = match result {
        Ok(v) => (StatusCode::OK, Json(v)).into_response(),
        Err(e) => e.into_response(),
    };
    state.log("check_account", key, response.status(), 1);
    response
}

fn check_account_inner(
    state: &AppState,
    key: Option<&str>,
    body: &[u8],
) -> Result<Value, ServiceError> {
    let key = key
        .filter(|k| state.quotas.contains(k))
        .ok_or(ServiceError::UnknownKey)?;
    let payload: AccountPayload = parse(body)?;
    check_payload(&payload)?;
    let models = state.models()?;
    state.quotas.admit(key, Endpoint::CheckAccount, 1)?;
    let report = models
        .esc
        .score_account(&payload)
        .and_then(|r| r.calibrate(&models.calibration));
    let report = match report {
        Ok(r) => r,
        Err(e) => {
            state.quotas.refund(key, Endpoint::CheckAccount, 1);
            return Err(ServiceError::bad_request("payload", e.to_string()));
        }
    };
    let mut value =
        serde_json::to_value(&report).map_err(|e| ServiceError::Internal(e.to_string()))?;
    value["server_time"] = json!(timestamp(state.quotas.now()));
    Ok(value)
}

#[derive(Debug, Deserialize)]
struct BulkEntry {
    user: UserObject,
    probe_time: DateTime<Utc>,
}

async fn check_accounts_in_bulk(
    State(state): State<Arc<AppState>>,
    headers: HeaderMap,
    body: Bytes,
) -> Response {
    let key = api_key(&headers);
    let result = bulk_inner(&state, key, &body);
    let (response, units) = match result {
        Ok((v, n)) => ((StatusCode::OK, Json(v)).into_response(), n),
        Err(e) => (e.into_response(), 0),
    };
    state.log("check_accounts_in_bulk", key, response.status(), units);
    response
}

fn bulk_inner(
    state: &AppState,
    key: Option<&str>,
    body: &[u8],
) -> Result<(Value, u64), ServiceError> {
    let key = key
        .filter(|k| state.quotas.contains(k))
        .ok_or(ServiceError::UnknownKey)?;
    let entries: Vec<Value> = parse(body)?;
    if entries.len() > state.page_size {
        return Err(ServiceError::bad_request(
            "body",
            format!(
                "{} entries, at most {} per request",
                entries.len(),
                state.page_size
            ),
        ));
    }
    let models = state.models()?;
    let units = entries.len() as u64;
    state.quotas.admit(key, Endpoint::LiteUsers, units)?;
    let results = entries
        .iter()
        .enumerate()
        .map(|(i, raw)| {
            let user_id = raw.pointer("/user/user_id").cloned().unwrap_or(Value::Null);
            let scored = parse::<BulkEntry>(raw.to_string().as_bytes())
                .map_err(|e| e.to_string())
                .and_then(|entry| {
                    models
                        .lite
                        .score(&entry.user, entry.probe_time)
                        .map_err(|e| e.to_string())
                });
            match scored {
                Ok(score) => json!({ "user_id": user_id, "botscore": score }),
                Err(message) => json!({ "user_id": user_id, "index": i, "error": message }),
            }
        })
        .collect();
    Ok((Value::Array(results), units))
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    match state.models() {
        Ok(m) => (
            StatusCode::OK,
            Json(json!({
                "status": "ok",
                "model_version": m.esc.model_version,
                "registry_version": m.esc.registry.version,
                "calibration_version": m.calibration.version,
                "lite_model_version": m.lite.model_version,
            })),
        )
            .into_response(),
        Err(e) => e.into_response(),
    }
}
