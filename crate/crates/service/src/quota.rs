//! Per-key daily quotas.
//!
//! Windows are UTC calendar days. Every admission is a single
//! check-and-increment under one lock, so concurrent requests can never be
//! granted more than the quota between them.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;

use chrono::{DateTime, Duration, NaiveTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

pub const DEFAULT_QUOTA_CHECK_ACCOUNT: u64 = 43_200;
pub const DEFAULT_QUOTA_LITE_USERS: u64 = 8_600_000;

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// A clock that only moves when told to.
#[derive(Debug)]
pub struct ManualClock(Mutex<DateTime<Utc>>);

impl ManualClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        ManualClock(Mutex::new(start))
    }

    pub fn set(&self, t: DateTime<Utc>) {
        *self.0.lock().unwrap() = t;
    }

    pub fn advance(&self, by: Duration) {
        *self.0.lock().unwrap() += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> DateTime<Utc> {
        *self.0.lock().unwrap()
    }
}

impl<C: Clock + ?Sized> Clock for std::sync::Arc<C> {
    fn now(&self) -> DateTime<Utc> {
        (**self).now()
    }
}

/// Start of the UTC day containing `t`.
pub fn day_start(t: DateTime<Utc>) -> DateTime<Utc> {
    t.date_naive().and_time(NaiveTime::MIN).and_utc()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    CheckAccount,
    LiteUsers,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiKeyRecord {
    pub key: String,
    pub quota_check_account: u64,
    pub quota_lite_users: u64,
    pub window_start: DateTime<Utc>,
    pub used_check_account: u64,
    pub used_lite_users: u64,
}

impl ApiKeyRecord {
    pub fn new(key: impl Into<String>, quota_check_account: u64, quota_lite_users: u64) -> Self {
        ApiKeyRecord {
            key: key.into(),
            quota_check_account,
            quota_lite_users,
            window_start: DateTime::<Utc>::MIN_UTC,
            used_check_account: 0,
            used_lite_users: 0,
        }
    }

    pub fn with_default_quotas(key: impl Into<String>) -> Self {
        Self::new(key, DEFAULT_QUOTA_CHECK_ACCOUNT, DEFAULT_QUOTA_LITE_USERS)
    }

    fn roll(&mut self, now: DateTime<Utc>) {
        let today = day_start(now);
        if today > self.window_start {
            self.window_start = today;
            self.used_check_account = 0;
            self.used_lite_users = 0;
        }
    }

    fn slot(&mut self, endpoint: Endpoint) -> (u64, &mut u64) {
        match endpoint {
            Endpoint::CheckAccount => (self.quota_check_account, &mut self.used_check_account),
            Endpoint::LiteUsers => (self.quota_lite_users, &mut self.used_lite_users),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Admission {
    pub used: u64,
    pub limit: u64,
    pub reset: DateTime<Utc>,
}

/// Reads a key file: one key per line, optionally followed by its
/// check_account and lite quotas. Blank lines and `#` comments are skipped.
pub fn parse_key_file(
    text: &str,
    default_check: u64,
    default_lite: u64,
) -> Result<Vec<ApiKeyRecord>, ServiceError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().expect("non-empty line has a token");
        let mut quota = |default: u64| -> Result<u64, ServiceError> {
            parts.next().map_or(Ok(default), |q| {
                q.replace('_', "").parse().map_err(|_| {
                    ServiceError::Config(format!("key file line {}: bad quota {q:?}", n + 1))
                })
            })
        };
        let check = quota(default_check)?;
        let lite = quota(default_lite)?;
        if parts.next().is_some() {
            return Err(ServiceError::Config(format!(
                "key file line {}: too many fields",
                n + 1
            )));
        }
        out.push(ApiKeyRecord::new(key, check, lite));
    }
    Ok(out)
}

pub struct QuotaBook {
    records: Mutex<HashMap<String, ApiKeyRecord>>,
    clock: Box<dyn Clock>,
}

impl QuotaBook {
    pub fn new(
        records: impl IntoIterator<Item = ApiKeyRecord>,
        clock: impl Clock + 'static,
    ) -> Self {
        QuotaBook {
            records: Mutex::new(records.into_iter().map(|r| (r.key.clone(), r)).collect()),
            clock: Box::new(clock),
        }
    }

    pub fn from_key_file(
        path: &Path,
        default_check: u64,
        default_lite: u64,
        clock: impl Clock + 'static,
    ) -> Result<Self, ServiceError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ServiceError::Config(format!("reading {}: {e}", path.display())))?;
        Ok(Self::new(
            parse_key_file(&text, default_check, default_lite)?,
            clock,
        ))
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.records.lock().unwrap().contains_key(key)
    }

    /// Grants `units` of `endpoint` to `key` or nothing at all.
    pub fn admit(
        &self,
        key: &str,
        endpoint: Endpoint,
        units: u64,
    ) -> Result<Admission, ServiceError> {
        let now = self.clock.now();
        let reset = day_start(now) + Duration::days(1);
        let mut records = self.records.lock().unwrap();
        let record = records.get_mut(key).ok_or(ServiceError::UnknownKey)?;
        record.roll(now);
        let (limit, used) = record.slot(endpoint);
        if used.saturating_add(units) > limit {
            return Err(ServiceError::QuotaExhausted {
                endpoint,
                limit,
                used: *used,
                requested: units,
                reset,
                retry_after: (reset - now).num_seconds(),
            });
        }
        *used += units;
        Ok(Admission {
            used: *used,
            limit,
            reset,
        })
    }

    /// Returns units granted by [`admit`](Self::admit) for work that then failed.
    pub fn refund(&self, key: &str, endpoint: Endpoint, units: u64) {
        if let Some(record) = self.records.lock().unwrap().get_mut(key) {
            let (_, used) = record.slot(endpoint);
            *used = used.saturating_sub(units);
        }
    }

    pub fn snapshot(&self, key: &str) -> Option<ApiKeyRecord> {
        let now = self.clock.now();
        let mut records = self.records.lock().unwrap();
        let r = records.get_mut(key)?;
        r.roll(now);
        Some(r.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    fn t(s: &str) -> DateTime<Utc> {
        s.parse().unwrap()
    }

    #[test]
    fn resets_exactly_at_utc_midnight() {
        let clock = Arc::new(ManualClock::new(t("2021-06-01T23:59:58Z")));
        let book = QuotaBook::new([ApiKeyRecord::new("k", 2, 10)], clock.clone());
        book.admit("k", Endpoint::CheckAccount, 1).unwrap();
        book.admit("k", Endpoint::CheckAccount, 1).unwrap();
        match book.admit("k", Endpoint::CheckAccount, 1) {
            Err(ServiceError::QuotaExhausted { reset, .. }) => {
                assert_eq!(reset, t("2021-06-02T00:00:00Z"))
            }
            other => panic!("unexpected {other:?}"),
        }
        clock.set(t("2021-06-01T23:59:59.999Z"));
        assert!(book.admit("k", Endpoint::CheckAccount, 1).is_err());
        clock.set(t("2021-06-02T00:00:00Z"));
        assert_eq!(book.admit("k", Endpoint::CheckAccount, 1).unwrap().used, 1);
    }

    #[test]
    fn endpoints_have_separate_counters_and_batches_are_all_or_nothing() {
        let book = QuotaBook::new(
            [ApiKeyRecord::new("k", 1, 10)],
            ManualClock::new(t("2021-06-01T00:00:00Z")),
        );
        book.admit("k", Endpoint::CheckAccount, 1).unwrap();
        book.admit("k", Endpoint::LiteUsers, 7).unwrap();
        assert!(book.admit("k", Endpoint::LiteUsers, 4).is_err());
        assert_eq!(book.snapshot("k").unwrap().used_lite_users, 7);
        book.admit("k", Endpoint::LiteUsers, 3).unwrap();
        assert!(matches!(
            book.admit("nope", Endpoint::LiteUsers, 1),
            Err(ServiceError::UnknownKey)
        ));
    }

    #[test]
    fn key_file() {
        let text = "# keys\nalpha\nbeta 100 2_000  # small\n\n";
        let keys = parse_key_file(text, 5, 6).unwrap();
        assert_eq!(keys[0], ApiKeyRecord::new("alpha", 5, 6));
        assert_eq!(keys[1], ApiKeyRecord::new("beta", 100, 2000));
        assert!(parse_key_file("k 1 2 3", 5, 6).is_err());
        assert!(parse_key_file("k lots", 5, 6).is_err());
    }
}
