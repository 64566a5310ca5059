//! Tracks one account's score across probes. The score only moves when the
//! account's payload does.
//!
//! cargo run --release -p botscope --example score_series -- /tmp/series.jsonl

use chrono::Duration;

use botscope::analysis::SeriesStore;
use botscope::corpus::{synthesize_corpus, CorpusSpec};
use botscope::ensemble::train_esc;
use botscope::features::default_registry;
use botscope::forest::ForestParams;

fn main() -> botscope::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "series.jsonl".into());
    let _ = std::fs::remove_file(&path);
    let spec = CorpusSpec::fixture();
    let dataset = synthesize_corpus(&spec, 7)?;
    let model = train_esc(
        std::slice::from_ref(&dataset),
        &default_registry(),
        &ForestParams::default(),
        7,
    )?;

    let mut store = SeriesStore::open(&path)?;
    let account = dataset.records()[0].payload.clone();
    let user_id = account.user.user_id.clone();
    for week in 0..4i64 {
        // Later probes see a shorter timeline, as if older tweets had been deleted.
        let mut payload = account.clone();
        payload.probe_time = account.probe_time + Duration::weeks(week);
        payload
            .timeline
            .truncate(payload.timeline.len().saturating_sub(30 * week as usize));
        let report = model.score_account(&payload)?;
        store.record_probe(
            &user_id,
            payload.probe_time,
            report.raw_overall(),
            &report.model_version,
        )?;
    }
    for p in &store.get(&user_id).expect("recorded").points {
        println!("{} {:.3}", p.probe_time, p.raw_score);
    }
    Ok(())
}
