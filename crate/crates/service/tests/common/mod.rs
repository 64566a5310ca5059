#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::{DateTime, Utc};
use http_body_util::BodyExt;
use serde_json::Value;
use tower::ServiceExt;

use botscope::corpus::{synthesize_corpus, CorpusSpec, LabeledDataset};
use botscope::ensemble::{train_esc, Calibration, DEFAULT_PRIOR};
use botscope::features::default_registry;
use botscope::forest::ForestParams;
use botscope::lite::train_lite;
use botscope_service::{
    router, ApiKeyRecord, AppState, ManualClock, Models, QuotaBook, API_KEY_HEADER,
};

pub fn corpus() -> &'static LabeledDataset {
    static CORPUS: OnceLock<LabeledDataset> = OnceLock::new();
    CORPUS.get_or_init(|| synthesize_corpus(&CorpusSpec::fixture(), 11).unwrap())
}

pub fn models() -> Models {
    static MODELS: OnceLock<Models> = OnceLock::new();
    MODELS
        .get_or_init(|| {
            let registry = default_registry();
            let params = ForestParams::default().with_trees(20);
            let data = std::slice::from_ref(corpus());
            let esc = train_esc(data, &registry, &params, 1).unwrap();
            let calibration = Calibration::fit(&esc, data, DEFAULT_PRIOR).unwrap();
            let lite = train_lite(data, &registry, &params, 2).unwrap();
            Models::new(esc, calibration, lite).unwrap()
        })
        .clone()
}

pub fn start_time() -> DateTime<Utc> {
    "2021-06-01T08:00:00Z".parse().unwrap()
}

/// A ready service with the given keys on a manual clock.
pub fn app(keys: Vec<ApiKeyRecord>, page_size: usize) -> (Router, Arc<AppState>, Arc<ManualClock>) {
    let clock = Arc::new(ManualClock::new(start_time()));
    let state = Arc::new(AppState::new(
        QuotaBook::new(keys, clock.clone()),
        page_size,
    ));
    state.install_models(models());
    (router(state.clone()), state, clock)
}

pub async fn send(
    app: &Router,
    method: &str,
    uri: &str,
    key: Option<&str>,
    body: impl Into<String>,
) -> (StatusCode, Value) {
    let (status, bytes) = send_raw(app, method, uri, key, body).await;
    let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
    (status, value)
}

pub async fn send_raw(
    app: &Router,
    method: &str,
    uri: &str,
    key: Option<&str>,
    body: impl Into<String>,
) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json");
    if let Some(k) = key {
        req = req.header(API_KEY_HEADER, k);
    }
    let response = app
        .clone()
        .oneshot(req.body(Body::from(body.into())).unwrap())
        .await
        .unwrap();
    let status = response.status();
    let bytes = response
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    (status, bytes)
}

/// The smallest valid payload: a bare user object.
pub fn bare_payload() -> String {
    let mut p = corpus().records()[0].payload.clone();
    p.timeline.clear();
    p.mentions.clear();
    serde_json::to_string(&p).unwrap()
}
