//! Account and tweet records, labeled datasets, and corpus generation.
//!
//! The record layout follows the public Twitter v1.1 payloads closely enough
//! that fixtures are easy to hand-edit: an [`AccountPayload`] is the user
//! object, up to 200 of its most recent tweets (newest first), and tweets by
//! other accounts that mention it.

mod io;
mod synth;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{
    load_dataset, read_jsonl, read_payloads, save_dataset, write_jsonl, write_payloads,
    LABELS_FILE, PAYLOADS_FILE,
};
pub use synth::{synthesize_corpus, Archetype, ArchetypeParams, CorpusSpec, Range};

/// Maximum number of timeline tweets carried by one payload.
pub const MAX_TIMELINE: usize = 200;

/// Account metadata, the "user object" embedded in every tweet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserObject {
    pub user_id: String,
    pub screen_name: String,
    pub display_name: String,
    pub created_at: DateTime<Utc>,
    pub followers_count: u64,
    pub friends_count: u64,
    pub statuses_count: u64,
    pub listed_count: u64,
    pub favourites_count: u64,
    pub verified: bool,
    pub default_profile: bool,
    pub default_profile_image: bool,
    pub profile_use_background_image: bool,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_language: Option<String>,
}

impl UserObject {
    pub fn validate(&self) -> Result<()> {
        if self.user_id.is_empty() {
            return Err(Error::Invalid("user_id is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Entities {
    #[serde(default)]
    pub hashtags: Vec<String>,
    /// user_ids of mentioned accounts.
    #[serde(default)]
    pub user_mentions: Vec<String>,
    #[serde(default)]
    pub urls: Vec<String>,
    /// Uppercase symbols without the leading `$`.
    #[serde(default)]
    pub cashtags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub tweet_id: String,
    pub author: UserObject,
    pub created_at: DateTime<Utc>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lang: Option<String>,
    #[serde(default)]
    pub entities: Entities,
    #[serde(default)]
    pub is_retweet: bool,
    #[serde(default)]
    pub is_reply: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub retweeted_user_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replied_user_id: Option<String>,
}

impl TweetRecord {
    pub fn validate(&self) -> Result<()> {
        self.author.validate()?;
        if self.created_at < self.author.created_at {
            return Err(Error::Invalid(format!(
                "tweet {} predates its author's account",
                self.tweet_id
            )));
        }
        if self.is_retweet && self.retweeted_user_id.is_none() {
            return Err(Error::Invalid(format!(
                "tweet {} is a retweet without retweeted_user_id",
                self.tweet_id
            )));
        }
        for tag in &self.entities.cashtags {
            if tag.starts_with('$') || tag.chars().any(|c| c.is_lowercase()) {
                return Err(Error::Invalid(format!(
                    "tweet {}: cashtag {tag:?} must be uppercase without '$'",
                    self.tweet_id
                )));
            }
        }
        Ok(())
    }

    pub fn has_cashtag(&self, symbol: &str) -> bool {
        self.entities.cashtags.iter().any(|c| c == symbol)
    }
}

/// Everything the full classifier sees about one account at one moment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountPayload {
    pub user: UserObject,
    /// Newest first.
    #[serde(default)]
    pub timeline: Vec<TweetRecord>,
    #[serde(default)]
    pub mentions: Vec<TweetRecord>,
    pub probe_time: DateTime<Utc>,
}

impl AccountPayload {
    pub fn validate(&self) -> Result<()> {
        let user = &self.user;
        user.validate()?;
        if self.timeline.len() > MAX_TIMELINE {
            return Err(Error::Invalid(format!(
                "timeline of {} has {} tweets, limit is {MAX_TIMELINE}",
                user.user_id,
                self.timeline.len()
            )));
        }
        if self.probe_time < user.created_at {
            return Err(Error::Invalid(format!(
                "probe_time precedes creation of {}",
                user.user_id
            )));
        }
        let mut previous: Option<DateTime<Utc>> = None;
        for tweet in &self.timeline {
            tweet.validate()?;
            if tweet.author.user_id != user.user_id {
                return Err(Error::Invalid(format!(
                    "timeline tweet {} is authored by {}, not {}",
                    tweet.tweet_id, tweet.author.user_id, user.user_id
                )));
            }
            if let Some(prev) = previous {
                if tweet.created_at > prev {
                    return Err(Error::Invalid(format!(
                        "timeline of {} is not ordered newest first at tweet {}",
                        user.user_id, tweet.tweet_id
                    )));
                }
            }
            previous = Some(tweet.created_at);
            self.check_probe_time(tweet)?;
        }
        for tweet in &self.mentions {
            tweet.validate()?;
            if !tweet.entities.user_mentions.contains(&user.user_id) {
                return Err(Error::Invalid(format!(
                    "mention tweet {} does not mention {}",
                    tweet.tweet_id, user.user_id
                )));
            }
            self.check_probe_time(tweet)?;
        }
        Ok(())
    }

    /// The same payload under another user_id. Every reference to the old id
    /// (authorship, replies, retweets, mentions, id-derived tweet ids) is
    /// rewritten.
    pub fn with_user_id(&self, new_id: &str) -> AccountPayload {
        let old = self.user.user_id.as_str();
        let swap = |s: &mut String| {
            if let Some(rest) = s.strip_prefix(old) {
                *s = format!("{new_id}{rest}");
            }
        };
        let fix = |t: &TweetRecord| {
            let mut t = t.clone();
            swap(&mut t.tweet_id);
            if t.author.user_id == old {
                t.author.user_id = new_id.to_string();
            }
            for id in t
                .entities
                .user_mentions
                .iter_mut()
                .chain(&mut t.replied_user_id)
                .chain(&mut t.retweeted_user_id)
            {
                if id == old {
                    *id = new_id.to_string();
                }
            }
            t
        };
        let mut user = self.user.clone();
        user.user_id = new_id.to_string();
        AccountPayload {
            user,
            timeline: self.timeline.iter().map(fix).collect(),
            mentions: self.mentions.iter().map(fix).collect(),
            probe_time: self.probe_time,
        }
    }

    fn check_probe_time(&self, tweet: &TweetRecord) -> Result<()> {
        if tweet.created_at > self.probe_time || tweet.author.created_at > self.probe_time {
            return Err(Error::Invalid(format!(
                "tweet {} is newer than probe_time",
                tweet.tweet_id
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Human,
    Bot,
}

impl Label {
    pub fn is_bot(self) -> bool {
        self == Label::Bot
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Human => "human",
            Label::Bot => "bot",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "human" => Ok(Label::Human),
            "bot" => Ok(Label::Bot),
            other => Err(Error::Invalid(format!("unknown label {other:?}"))),
        }
    }
}

/// Bot taxonomy used to group training data for the specialized forests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BotClass {
    FakeFollower,
    Spammer,
    SelfDeclared,
    Astroturf,
    Financial,
    Other,
}

impl BotClass {
    pub const ALL: [BotClass; 6] = [
        BotClass::FakeFollower,
        BotClass::Spammer,
        BotClass::SelfDeclared,
        BotClass::Astroturf,
        BotClass::Financial,
        BotClass::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BotClass::FakeFollower => "fake_follower",
            BotClass::Spammer => "spammer",
            BotClass::SelfDeclared => "self_declared",
            BotClass::Astroturf => "astroturf",
            BotClass::Financial => "financial",
            BotClass::Other => "other",
        }
    }
}

impl fmt::Display for BotClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BotClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        BotClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown bot class {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledRecord {
    pub payload: AccountPayload,
    pub label: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bot_class: Option<BotClass>,
}

impl LabeledRecord {
    pub fn user_id(&self) -> &str {
        &self.payload.user.user_id
    }

    /// Class used for specialized training; unclassified bots fall into `other`.
    pub fn effective_class(&self) -> Option<BotClass> {
        match self.label {
            Label::Human => None,
            Label::Bot => Some(self.bot_class.unwrap_or(BotClass::Other)),
        }
    }
}

/// A named, validated collection of labeled account payloads.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    name: String,
    records: Vec<LabeledRecord>,
}

impl LabeledDataset {
    /// Validates every payload and rejects duplicate user ids.
    pub fn new(name: impl Into<String>, records: Vec<LabeledRecord>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for record in &records {
            record.payload.validate()?;
            if !seen.insert(record.user_id()) {
                return Err(Error::DuplicateUser(record.user_id().to_string()));
            }
        }
        Ok(LabeledDataset {
            name: name.into(),
            records,
        })
    }

    /// Tags every bot record that has no class yet.
    pub fn with_bot_class(mut self, class: BotClass) -> Self {
        for record in &mut self.records {
            if record.label.is_bot() && record.bot_class.is_none() {
                record.bot_class = Some(class);
            }
        }
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn records(&self) -> &[LabeledRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn bots(&self) -> usize {
        self.records.iter().filter(|r| r.label.is_bot()).count()
    }

    pub fn humans(&self) -> usize {
        self.len() - self.bots()
    }

    /// Bots and humans, in that order.
    pub fn counts(&self) -> (usize, usize) {
        (self.bots(), self.humans())
    }

    pub fn user_ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(LabeledRecord::user_id)
    }

    pub fn into_records(self) -> Vec<LabeledRecord> {
        self.records
    }
}

/// Tweets whose entities carry `cashtag`, in input order.
pub fn group_tweets_by_query<'a>(tweets: &'a [TweetRecord], cashtag: &str) -> Vec<&'a TweetRecord> {
    tweets.iter().filter(|t| t.has_cashtag(cashtag)).collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use chrono::TimeZone;

    pub(crate) fn user(id: &str) -> UserObject {
        UserObject {
            user_id: id.to_string(),
            screen_name: format!("user_{id}"),
            display_name: "Test User".into(),
            created_at: Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap(),
            followers_count: 10,
            friends_count: 10,
            statuses_count: 10,
            listed_count: 0,
            favourites_count: 0,
            verified: false,
            default_profile: false,
            default_profile_image: false,
            profile_use_background_image: true,
            description: String::new(),
            declared_language: None,
        }
    }

    pub(crate) fn tweet(id: &str, author: &UserObject, day: u32) -> TweetRecord {
        TweetRecord {
            tweet_id: id.to_string(),
            author: author.clone(),
            created_at: Utc.with_ymd_and_hms(2020, 1, day, 12, 0, 0).unwrap(),
            text: "hello world".into(),
            lang: Some("en".into()),
            entities: Entities::default(),
            is_retweet: false,
            is_reply: false,
            retweeted_user_id: None,
            replied_user_id: None,
        }
    }

    fn payload() -> AccountPayload {
        let u = user("1");
        AccountPayload {
            timeline: vec![tweet("b", &u, 3), tweet("a", &u, 2)],
            mentions: vec![],
            probe_time: Utc.with_ymd_and_hms(2020, 2, 1, 0, 0, 0).unwrap(),
            user: u,
        }
    }

    #[test]
    fn valid_payload_passes() {
        payload().validate().unwrap();
    }

    #[test]
    fn timeline_cap_is_enforced() {
        let mut p = payload();
        let t = p.timeline[1].clone();
        p.timeline = vec![t; MAX_TIMELINE + 1];
        assert!(p.validate().is_err());
        p.timeline.pop();
        p.validate().unwrap();
    }

    #[test]
    fn timeline_must_be_newest_first() {
        let mut p = payload();
        p.timeline.reverse();
        assert!(p.validate().is_err());
    }

    #[test]
    fn foreign_author_in_timeline_rejected() {
        let mut p = payload();
        p.timeline[0].author = user("2");
        assert!(p.validate().is_err());
    }

    #[test]
    fn mention_must_name_user() {
        let mut p = payload();
        let other = user("2");
        let mut t = tweet("m", &other, 4);
        p.mentions.push(t.clone());
        assert!(p.validate().is_err());
        t.entities.user_mentions.push("1".into());
        p.mentions = vec![t];
        p.validate().unwrap();
    }

    #[test]
    fn retweet_needs_source() {
        let u = user("1");
        let mut t = tweet("x", &u, 2);
        t.is_retweet = true;
        assert!(t.validate().is_err());
        t.retweeted_user_id = Some("9".into());
        t.validate().unwrap();
    }

    #[test]
    fn cashtags_are_uppercase_symbols() {
        let u = user("1");
        let mut t = tweet("x", &u, 2);
        t.entities.cashtags = vec!["$SHIB".into()];
        assert!(t.validate().is_err());
        t.entities.cashtags = vec!["shib".into()];
        assert!(t.validate().is_err());
        t.entities.cashtags = vec!["SHIB".into()];
        t.validate().unwrap();
    }

    #[test]
    fn tweet_before_account_creation_rejected() {
        let u = user("1");
        let mut t = tweet("x", &u, 2);
        t.created_at = Utc.with_ymd_and_hms(2019, 12, 31, 0, 0, 0).unwrap();
        assert!(t.validate().is_err());
    }

    #[test]
    fn duplicate_user_ids_rejected() {
        let rec = LabeledRecord {
            payload: payload(),
            label: Label::Human,
            bot_class: None,
        };
        let err = LabeledDataset::new("d", vec![rec.clone(), rec]).unwrap_err();
        assert!(matches!(err, Error::DuplicateUser(id) if id == "1"));
    }

    #[test]
    fn counts_and_class_tagging() {
        let mut bot = LabeledRecord {
            payload: payload(),
            label: Label::Bot,
            bot_class: None,
        };
        assert_eq!(bot.effective_class(), Some(BotClass::Other));
        let ds = LabeledDataset::new("d", vec![bot.clone()])
            .unwrap()
            .with_bot_class(BotClass::Spammer);
        assert_eq!(ds.counts(), (1, 0));
        assert_eq!(ds.records()[0].bot_class, Some(BotClass::Spammer));
        bot.label = Label::Human;
        assert_eq!(bot.effective_class(), None);
    }

    #[test]
    fn group_by_cashtag() {
        let u = user("1");
        let mut both = tweet("1", &u, 2);
        both.entities.cashtags = vec!["SHIB".into(), "FLOKI".into()];
        let mut shib = tweet("2", &u, 3);
        shib.entities.cashtags = vec!["SHIB".into()];
        let plain = tweet("3", &u, 4);
        let tweets = vec![both, shib, plain];

        let ids = |v: Vec<&TweetRecord>| v.iter().map(|t| t.tweet_id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(group_tweets_by_query(&tweets, "SHIB")), ["1", "2"]);
        assert_eq!(ids(group_tweets_by_query(&tweets, "FLOKI")), ["1"]);
        assert!(group_tweets_by_query(&tweets, "AAPL").is_empty());
    }

    #[test]
    fn bot_class_parses_all_names() {
        for c in BotClass::ALL {
            assert_eq!(c.as_str().parse::<BotClass>().unwrap(), c);
        }
        assert!("cyborg".parse::<BotClass>().is_err());
    }
}
