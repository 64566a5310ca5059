//! Synthetic cashtag groups for replaying the case study.
//!
//! Each group is a set of tweets mentioning one cashtag, written by accounts
//! drawn from the corpus archetypes. The generator hits the configured raw and
//! English-only tweet and account counts exactly; scores are whatever the
//! trained model makes of the authors' payloads.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, Utc};
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::SampleCounts;
use crate::corpus::{
    synthesize_corpus, Archetype, CorpusSpec, Entities, LabeledRecord, TweetRecord,
};
use crate::error::{Error, Result};
use crate::lexicon::lexicon;

const FIXTURE: &str = include_str!("../fixtures/casestudy.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub cashtag: String,
    pub raw_tweets: usize,
    pub raw_accounts: usize,
    pub english_tweets: usize,
    pub english_accounts: usize,
    pub mix: BTreeMap<Archetype, f64>,
}

impl GroupSpec {
    pub fn expected(&self) -> SampleCounts {
        SampleCounts {
            raw_tweets: self.raw_tweets,
            raw_accounts: self.raw_accounts,
            tweets: self.english_tweets,
            accounts: self.english_accounts,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("group {}: {m}", self.cashtag)));
        if self.cashtag.is_empty() || self.cashtag.chars().any(|c| c.is_lowercase() || c == '$') {
            return bad("cashtag must be uppercase without '$'");
        }
        if self.english_accounts > self.raw_accounts || self.english_tweets > self.raw_tweets {
            return bad("english counts exceed raw counts");
        }
        if self.english_accounts > self.english_tweets {
            return bad("more english accounts than english tweets");
        }
        if self.raw_accounts - self.english_accounts > self.raw_tweets - self.english_tweets {
            return bad("more non-english accounts than non-english tweets");
        }
        if (self.english_accounts == 0) != (self.english_tweets == 0)
            || (self.raw_accounts == self.english_accounts)
                != (self.raw_tweets == self.english_tweets)
        {
            return bad("tweets without authors");
        }
        if self.mix.values().any(|&w| w.is_nan() || w < 0.0) || self.mix.values().sum::<f64>() <= 0.0 {
            return bad("mix weights must be non-negative with a positive sum");
        }
        Ok(())
    }

    /// Authors per archetype by largest remainder, so they sum to `raw_accounts`.
    pub fn archetype_counts(&self) -> Vec<(Archetype, u32)> {
        let total: f64 = self.mix.values().sum();
        let quotas: Vec<(Archetype, f64)> = self
            .mix
            .iter()
            .map(|(&a, &w)| (a, w / total * self.raw_accounts as f64))
            .collect();
        let mut counts: Vec<(Archetype, u32)> =
            quotas.iter().map(|&(a, q)| (a, q.floor() as u32)).collect();
        let assigned: usize = counts.iter().map(|&(_, n)| n as usize).sum();
        let mut order: Vec<usize> = (0..quotas.len()).collect();
        order.sort_by(|&i, &j| {
            let frac = |k: usize| quotas[k].1 - quotas[k].1.floor();
            frac(j).total_cmp(&frac(i)).then(i.cmp(&j))
        });
        for &i in order.iter().take(self.raw_accounts - assigned) {
            counts[i].1 += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseStudySpec {
    pub version: String,
    pub probe_time: DateTime<Utc>,
    pub human_tweet_weight: f64,
    pub bot_tweet_weight: f64,
    pub other_languages: Vec<String>,
    pub groups: Vec<GroupSpec>,
}

impl CaseStudySpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let spec: CaseStudySpec = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// The shipped three-group configuration.
    pub fn fixture() -> Self {
        Self::from_toml_str(FIXTURE).expect("shipped case-study fixture parses")
    }

    pub fn validate(&self) -> Result<()> {
        if self.other_languages.is_empty() || self.other_languages.iter().any(|l| l == "en") {
            return Err(Error::Config(
                "other_languages must be non-empty and exclude en".into(),
            ));
        }
        if !(self.human_tweet_weight > 0.0 && self.bot_tweet_weight > 0.0) {
            return Err(Error::Config("tweet weights must be positive".into()));
        }
        self.groups.iter().try_for_each(GroupSpec::validate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseGroup {
    pub cashtag: String,
    /// Tweets mentioning the cashtag, oldest first.
    pub tweets: Vec<TweetRecord>,
    /// Every author with its full payload and synthetic label.
    pub accounts: Vec<LabeledRecord>,
    pub expected: SampleCounts,
}

/// Generates every group. Output is a pure function of the two specs and `seed`.
pub fn generate_case_study(
    spec: &CaseStudySpec,
    corpus: &CorpusSpec,
    seed: u64,
) -> Result<Vec<CaseGroup>> {
    spec.validate()?;
    spec.groups
        .iter()
        .enumerate()
        .map(|(gi, g)| generate_group(spec, g, corpus, seed, gi as u64))
        .collect()
}

fn generate_group(
    spec: &CaseStudySpec,
    g: &GroupSpec,
    corpus: &CorpusSpec,
    seed: u64,
    stream: u64,
) -> Result<CaseGroup> {
    let tag = g.cashtag.to_lowercase();
    let mut corpus = corpus.clone().with_counts(&g.archetype_counts());
    corpus.name = tag.clone();
    corpus.probe_time = spec.probe_time;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let group_seed = rng.gen();
    let mut accounts: Vec<LabeledRecord> = synthesize_corpus(&corpus, group_seed)?
        .into_records()
        .into_iter()
        .map(|r| LabeledRecord {
            payload: r.payload.with_user_id(&format!("{tag}-{}", r.user_id())),
            ..r
        })
        .collect();

    let mut order: Vec<usize> = (0..accounts.len()).collect();
    order.shuffle(&mut rng);
    let (english, other) = order.split_at(g.english_accounts);
    for &i in other {
        let lang = spec
            .other_languages
            .choose(&mut rng)
            .expect("validated non-empty")
            .clone();
        let p = &mut accounts[i].payload;
        p.user.declared_language = Some(lang.clone());
        for t in &mut p.timeline {
            t.lang = Some(lang.clone());
            t.author.declared_language = Some(lang.clone());
        }
    }

    let weight = |r: &LabeledRecord| {
        if r.label.is_bot() {
            spec.bot_tweet_weight
        } else {
            spec.human_tweet_weight
        }
    };
    let mut per_account = vec![0usize; accounts.len()];
    for (members, total) in [
        (english, g.english_tweets),
        (other, g.raw_tweets - g.english_tweets),
    ] {
        if members.is_empty() {
            continue;
        }
        for &i in members {
            per_account[i] = 1;
        }
        let dist = WeightedIndex::new(members.iter().map(|&i| weight(&accounts[i])))
            .map_err(|e| Error::Config(e.to_string()))?;
        for _ in members.len()..total {
            per_account[members[dist.sample(&mut rng)]] += 1;
        }
    }

    let words = lexicon().content_words();
    let window = 7 * 86_400;
    let mut tweets = Vec::with_capacity(g.raw_tweets);
    for (i, &n) in per_account.iter().enumerate() {
        let user = &accounts[i].payload.user;
        let lang = user
            .declared_language
            .clone()
            .unwrap_or_else(|| "en".into());
        let oldest = (spec.probe_time - user.created_at)
            .num_seconds()
            .min(window);
        for _ in 0..n {
            let text: Vec<&str> = (0..rng.gen_range(4..12))
                .map(|_| *words.choose(&mut rng).unwrap())
                .collect();
            tweets.push(TweetRecord {
                tweet_id: String::new(),
                author: user.clone(),
                created_at: spec.probe_time - Duration::seconds(rng.gen_range(0..=oldest)),
                text: format!("{} ${}", text.join(" "), g.cashtag),
                lang: Some(lang.clone()),
                entities: Entities {
                    cashtags: vec![g.cashtag.clone()],
                    ..Entities::default()
                },
                is_retweet: false,
                is_reply: false,
                retweeted_user_id: None,
                replied_user_id: None,
            });
        }
    }
    tweets.sort_by(|a, b| {
        a.created_at
            .cmp(&b.created_at)
            .then_with(|| a.author.user_id.cmp(&b.author.user_id))
    });
    for (k, t) in tweets.iter_mut().enumerate() {
        t.tweet_id = format!("{tag}-q{k:05}");
    }
    Ok(CaseGroup {
        cashtag: g.cashtag.clone(),
        tweets,
        accounts,
        expected: g.expected(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{account_languages, build_sample_from_scores};
    use std::collections::HashMap;

    fn small() -> CaseStudySpec {
        let mut spec = CaseStudySpec::fixture();
        spec.groups = vec![GroupSpec {
            cashtag: "TEST".into(),
            raw_tweets: 60,
            raw_accounts: 30,
            english_tweets: 45,
            english_accounts: 22,
            mix: BTreeMap::from([(Archetype::Human, 0.6), (Archetype::Spammer, 0.4)]),
        }];
        spec
    }

    #[test]
    fn fixture_groups_are_consistent() {
        let spec = CaseStudySpec::fixture();
        assert_eq!(spec.groups.len(), 3);
        for g in &spec.groups {
            let n: u32 = g.archetype_counts().iter().map(|&(_, n)| n).sum();
            assert_eq!(n as usize, g.raw_accounts);
        }
    }

    #[test]
    fn small_group_hits_its_counts() {
        let groups = generate_case_study(&small(), &CorpusSpec::fixture(), 3).unwrap();
        let g = &groups[0];
        assert!(g
            .tweets
            .iter()
            .all(|t| t.has_cashtag("TEST") && t.validate().is_ok()));
        for r in &g.accounts {
            r.payload.validate().unwrap();
        }
        let scores: HashMap<String, f64> = g
            .accounts
            .iter()
            .map(|r| (r.user_id().to_string(), 0.5))
            .collect();
        let raw = build_sample_from_scores("TEST", &g.tweets, &scores, None).unwrap();
        let en = build_sample_from_scores("TEST", &g.tweets, &scores, Some("en")).unwrap();
        assert_eq!((raw.raw_tweets, raw.accounts.len()), (60, 30));
        assert_eq!(en.counts(), g.expected);
        // Non-English authors write only non-English tweets.
        let langs = account_languages(&g.tweets);
        for t in &g.tweets {
            assert_eq!(t.lang.as_deref(), Some(langs[&t.author.user_id].as_str()));
        }
    }

    #[test]
    fn deterministic() {
        let a = generate_case_study(&small(), &CorpusSpec::fixture(), 5).unwrap();
        let b = generate_case_study(&small(), &CorpusSpec::fixture(), 5).unwrap();
        assert_eq!(a, b);
        let c = generate_case_study(&small(), &CorpusSpec::fixture(), 6).unwrap();
        assert_ne!(a[0].tweets, c[0].tweets);
    }

    #[test]
    fn impossible_counts_rejected() {
        let mut spec = small();
        spec.groups[0].english_accounts = 50;
        assert!(spec.validate().is_err());
        let mut spec = small();
        spec.groups[0].english_tweets = 59;
        assert!(spec.validate().is_err());
        let mut spec = small();
        spec.groups[0].cashtag = "$test".into();
        assert!(spec.validate().is_err());
    }
}
