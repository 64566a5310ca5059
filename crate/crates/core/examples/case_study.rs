//! Replays the cashtag case study on synthetic groups: score every author,
//! keep English-speaking accounts, then compare the groups.
//!
//! cargo run --release -p botscope --example case_study

use std::collections::HashMap;

use botscope::analysis::{
    build_sample, distribution_tests, plot_data, threshold_sweep, Unit, DEFAULT_THRESHOLDS,
};
use botscope::casestudy::{generate_case_study, CaseStudySpec};
use botscope::corpus::{synthesize_corpus, CorpusSpec};
use botscope::ensemble::{train_esc, ScoreReport};
use botscope::features::default_registry;
use botscope::forest::ForestParams;

fn main() -> botscope::Result<()> {
    let seed = 42;
    let corpus = CorpusSpec::fixture();
    let training = synthesize_corpus(&corpus, seed)?;
    let model = train_esc(
        &[training],
        &default_registry(),
        &ForestParams::default(),
        seed,
    )?;
    let groups = generate_case_study(&CaseStudySpec::fixture(), &corpus, seed)?;

    println!(
        "{:<6} {:>10} {:>12} {:>10} {:>12}",
        "group", "raw tweets", "raw accounts", "en tweets", "en accounts"
    );
    let mut samples = Vec::new();
    for g in &groups {
        let scores = g
            .accounts
            .iter()
            .map(|r| Ok((r.user_id().to_string(), model.score_account(&r.payload)?)))
            .collect::<botscope::Result<HashMap<String, ScoreReport>>>()?;
        let sample = build_sample(&g.cashtag, &g.tweets, &scores, Some("en"))?;
        let c = sample.counts();
        println!(
            "{:<6} {:>10} {:>12} {:>10} {:>12}",
            g.cashtag, c.raw_tweets, c.raw_accounts, c.tweets, c.accounts
        );
        samples.push(sample);
    }

    println!();
    for report in threshold_sweep(&samples, &DEFAULT_THRESHOLDS, Unit::Tweet)? {
        let props: Vec<String> = report
            .groups
            .iter()
            .map(|g| format!("{} {:.3}", g.group, g.proportion))
            .collect();
        println!(
            "share of tweets from accounts scoring > {}: {}",
            report.threshold,
            props.join(", ")
        );
        for c in &report.comparisons {
            println!(
                "  {} vs {}: z = {:.3}, p = {:.2e} {}",
                c.group_a, c.group_b, c.test.statistic, c.test.p_value, c.stars
            );
        }
    }

    println!();
    for c in distribution_tests(&samples, Unit::Tweet)? {
        println!(
            "Mann-Whitney {} vs {}: U = {}, p = {:.2e} {}",
            c.group_a, c.group_b, c.test.statistic, c.test.p_value, c.stars
        );
    }
    for g in plot_data(&samples, 20, Unit::Tweet)?.groups {
        if let Some(s) = g.summary {
            println!(
                "{}: median {:.3}, mean {:.3}, IQR [{:.3}, {:.3}]",
                g.group, s.median, s.mean, s.q1, s.q3
            );
        }
    }
    Ok(())
}
