use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::quota::{DEFAULT_QUOTA_CHECK_ACCOUNT, DEFAULT_QUOTA_LITE_USERS};

/// Service settings. Every field can be overridden by a `BOTSCOPE_*`
/// environment variable named after it in upper case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ServiceConfig {
    pub bind: String,
    pub model: Option<PathBuf>,
    pub calibration: Option<PathBuf>,
    pub lite_model: Option<PathBuf>,
    pub keys: Option<PathBuf>,
    /// JSON-lines request log; no log when unset.
    pub request_log: Option<PathBuf>,
    /// Largest bulk request, in user objects.
    pub page_size: usize,
    pub quota_check_account: u64,
    pub quota_lite_users: u64,
    /// Replaces the bot prevalence stored in the calibration file.
    pub prior: Option<f64>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: "127.0.0.1:8080".into(),
            model: None,
            calibration: None,
            lite_model: None,
            keys: None,
            request_log: None,
            page_size: 100,
            quota_check_account: DEFAULT_QUOTA_CHECK_ACCOUNT,
            quota_lite_users: DEFAULT_QUOTA_LITE_USERS,
            prior: None,
        }
    }
}

impl ServiceConfig {
    pub fn from_toml_str(s: &str) -> Result<Self, ServiceError> {
        toml::from_str(s).map_err(|e| ServiceError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("reading {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Applies `BOTSCOPE_*` overrides from `vars`, usually `std::env::vars()`.
    pub fn with_env(
        mut self,
        vars: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ServiceError> {
        for (name, value) in vars {
            let Some(field) = name.strip_prefix("BOTSCOPE_") else {
                continue;
            };
            let number = |v: &str| {
                v.replace('_', "").parse::<u64>().map_err(|_| {
                    ServiceError::Config(format!("{name}={v:?} is not a non-negative integer"))
                })
            };
            match field {
                "BIND" => self.bind = value,
                "MODEL" => self.model = Some(value.into()),
                "CALIBRATION" => self.calibration = Some(value.into()),
                "LITE_MODEL" => self.lite_model = Some(value.into()),
                "KEYS" => self.keys = Some(value.into()),
                "REQUEST_LOG" => self.request_log = Some(value.into()),
                "PAGE_SIZE" => self.page_size = number(&value)? as usize,
                "QUOTA_CHECK_ACCOUNT" => self.quota_check_account = number(&value)?,
                "QUOTA_LITE_USERS" => self.quota_lite_users = number(&value)?,
                "PRIOR" => {
                    let prior = value.parse::<f64>().ok().filter(|p| *p > 0.0 && *p < 1.0);
                    self.prior = Some(prior.ok_or_else(|| {
                        ServiceError::Config(format!("{name}={value:?} is not in (0, 1)"))
                    })?);
                }
                _ => {}
            }
        }
        Ok(self)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
