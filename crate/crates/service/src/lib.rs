//! HTTP scoring service.
//!
//! Endpoints:
//!
//! * `POST /check_account`: one [`AccountPayload`](botscope::corpus::AccountPayload)
//!   in, a calibrated score report out.
//! * `POST /check_accounts_in_bulk`: a page of `{user, probe_time}` entries,
//!   scored by the metadata-only model.
//! * `GET /health`: versions of the loaded artifacts, or 503 until they load.
//!
//! Callers identify themselves with an `x-api-key` header. Each key has a
//! daily quota per endpoint; the bulk endpoint counts user objects, not
//! requests.

mod app;
mod config;
mod error;
mod quota;

use std::net::SocketAddr;
use std::sync::Arc;

pub use app::{router, AppState, Models, API_KEY_HEADER};
pub use config::ServiceConfig;
pub use error::ServiceError;
pub use quota::{
    day_start, parse_key_file, Admission, ApiKeyRecord, Clock, Endpoint, ManualClock, QuotaBook,
    SystemClock, DEFAULT_QUOTA_CHECK_ACCOUNT, DEFAULT_QUOTA_LITE_USERS,
};

/// Builds the state described by `config`: keys, request log and models.
pub fn state_from_config(
    config: &ServiceConfig,
    clock: impl Clock + 'static,
) -> Result<AppState, ServiceError> {
    let keys = config
        .keys
        .as_deref()
        .ok_or_else(|| ServiceError::Config("no key file configured".into()))?;
    let quotas = QuotaBook::from_key_file(
        keys,
        config.quota_check_account,
        config.quota_lite_users,
        clock,
    )?;
    let mut state = AppState::new(quotas, config.page_size);
    if let Some(log) = &config.request_log {
        state = state.with_request_log(log)?;
    }
    let (Some(model), Some(calibration), Some(lite)) =
        (&config.model, &config.calibration, &config.lite_model)
    else {
        return Err(ServiceError::Config(
            "model, calibration and lite_model paths are required".into(),
        ));
    };
    let mut models = Models::load(model, calibration, lite)?;
    if let Some(prior) = config.prior {
        models.calibration = models.calibration.with_prior(prior)?;
    }
    state.install_models(models);
    Ok(state)
}

/// Serves until ctrl-c.
pub async fn serve(state: Arc<AppState>, bind: &str) -> Result<(), ServiceError> {
    let addr: SocketAddr = bind
        .parse()
        .map_err(|e| ServiceError::Config(format!("bind address {bind:?}: {e}")))?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .map_err(|e| ServiceError::Config(format!("binding {addr}: {e}")))?;
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ServiceError::Internal(e.to_string()))
}
