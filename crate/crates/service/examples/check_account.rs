//! Runs the service in-process and calls each endpoint once, printing the
//! responses. To run it for real, use `botscope serve --service-config service.toml`.
//!
//! cargo run --release -p botscope-service --example check_account

use std::sync::Arc;

use axum::body::Body;
use axum::http::Request;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use botscope::corpus::{synthesize_corpus, CorpusSpec};
use botscope::ensemble::{train_esc, Calibration, DEFAULT_PRIOR};
use botscope::features::default_registry;
use botscope::forest::ForestParams;
use botscope::lite::train_lite;
use botscope_service::{
    router, ApiKeyRecord, AppState, Models, QuotaBook, SystemClock, API_KEY_HEADER,
};

async fn call(app: &axum::Router, method: &str, uri: &str, body: String) -> Value {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header(API_KEY_HEADER, "demo-key")
        .header("content-type", "application/json")
        .body(Body::from(body))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let bytes = response.into_body().collect().await.unwrap().to_bytes();
    println!("{method} {uri} -> {status}");
    serde_json::from_slice(&bytes).unwrap_or(Value::Null)
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = synthesize_corpus(&CorpusSpec::fixture(), 3)?;
    let registry = default_registry();
    let params = ForestParams::default();
    let data = std::slice::from_ref(&corpus);
    let esc = train_esc(data, &registry, &params, 3)?;
    let calibration = Calibration::fit(&esc, data, DEFAULT_PRIOR)?;
    let lite = train_lite(data, &registry, &params, 3)?;

    let state = AppState::new(
        QuotaBook::new([ApiKeyRecord::with_default_quotas("demo-key")], SystemClock),
        100,
    );
    state.install_models(Models::new(esc, calibration, lite)?);
    let app = router(Arc::new(state));

    println!("{}", call(&app, "GET", "/health", String::new()).await);

    let payload = &corpus.records()[250].payload;
    let result = call(
        &app,
        "POST",
        "/check_account",
        serde_json::to_string(payload)?,
    )
    .await;
    println!(
        "{}: display {}/5, CAP {}",
        result["user"]["screen_name"],
        result["display_scores"]["english"]["overall"],
        result["cap"]["english"]
    );

    let page: Vec<Value> = corpus
        .records()
        .iter()
        .step_by(100)
        .map(|r| json!({ "user": r.payload.user, "probe_time": r.payload.probe_time }))
        .collect();
    let scores = call(
        &app,
        "POST",
        "/check_accounts_in_bulk",
        Value::Array(page).to_string(),
    )
    .await;
    println!("{scores}");
    Ok(())
}
