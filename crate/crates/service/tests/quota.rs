mod common;

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::http::StatusCode;

use botscope_service::{
    ApiKeyRecord, Endpoint, ManualClock, QuotaBook, ServiceConfig, DEFAULT_QUOTA_CHECK_ACCOUNT,
    DEFAULT_QUOTA_LITE_USERS,
};
use common::{app, bare_payload, send, start_time};

#[tokio::test]
async fn default_key_allows_43200_checks_per_day() {
    let (app, _, clock) = app(vec![ApiKeyRecord::with_default_quotas("k")], 10);
    let payload = bare_payload();
    for i in 0..43_200 {
        let (status, _) = send(&app, "POST", "/check_account", Some("k"), payload.clone()).await;
        assert_eq!(status, StatusCode::OK, "request {}", i + 1);
    }
    let (status, body) = send(&app, "POST", "/check_account", Some("k"), payload.clone()).await;
    assert_eq!(status, StatusCode::TOO_MANY_REQUESTS);
    assert_eq!(body["reset"], "2021-06-02T00:00:00Z");
    clock.set("2021-06-02T00:00:00Z".parse().unwrap());
    let (status, _) = send(&app, "POST", "/check_account", Some("k"), payload).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 8)]
async fn concurrent_clients_never_over_admit() {
    let (app, _, _) = app(vec![ApiKeyRecord::new("k", 1000, 0)], 10);
    let payload = bare_payload();
    let granted = Arc::new(AtomicU64::new(0));
    let limited = Arc::new(AtomicU64::new(0));
    let clients: Vec<_> = (0..32)
        .map(|_| {
            let (app, payload, granted, limited) = (
                app.clone(),
                payload.clone(),
                granted.clone(),
                limited.clone(),
            );
            tokio::spawn(async move {
                for _ in 0..50 {
                    match send(&app, "POST", "/check_account", Some("k"), payload.clone())
                        .await
                        .0
                    {
                        StatusCode::OK => granted.fetch_add(1, Ordering::SeqCst),
                        StatusCode::TOO_MANY_REQUESTS => limited.fetch_add(1, Ordering::SeqCst),
                        other => panic!("unexpected {other}"),
                    };
                }
            })
        })
        .collect();
    for c in clients {
        c.await.unwrap();
    }
    assert_eq!(granted.load(Ordering::SeqCst), 1000);
    assert_eq!(limited.load(Ordering::SeqCst), 32 * 50 - 1000);
}

#[test]
fn quota_book_under_thread_contention() {
    let book = Arc::new(QuotaBook::new(
        [ApiKeyRecord::new("k", 1000, 5000)],
        ManualClock::new(start_time()),
    ));
    let granted: u64 = std::thread::scope(|s| {
        let handles: Vec<_> = (0..32)
            .map(|t| {
                let book = book.clone();
                s.spawn(move || {
                    let units = 1 + t % 3;
                    (0..200)
                        .filter(|_| book.admit("k", Endpoint::CheckAccount, 1).is_ok())
                        .count() as u64
                        + (0..50)
                            .filter(|_| book.admit("k", Endpoint::LiteUsers, units).is_ok())
                            .map(|_| units)
                            .sum::<u64>()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).sum()
    });
    let snap = book.snapshot("k").unwrap();
    assert_eq!(snap.used_check_account, 1000);
    assert!(snap.used_lite_users <= 5000);
    assert_eq!(granted, snap.used_check_account + snap.used_lite_users);
}

#[test]
fn lite_quota_is_two_hundred_times_check_quota() {
    let config = ServiceConfig::default();
    assert_eq!(config.quota_check_account, DEFAULT_QUOTA_CHECK_ACCOUNT);
    assert_eq!(config.quota_lite_users, DEFAULT_QUOTA_LITE_USERS);
    assert!(config.quota_lite_users / config.quota_check_account >= 199);
}
