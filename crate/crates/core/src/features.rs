//! Feature registry and deterministic extraction.
//!
//! The registry is a fixed, versioned table of 44 features in six classes.
//! Features in the `content_language` and `sentiment` classes read tweet text
//! and are flagged language dependent; everything else is computed from
//! metadata, entity ids and timestamps only. The `user_profile` class needs
//! nothing beyond the user object and a probe time, which makes it the
//! metadata-only ("lite") subset.
//!
//! Conventions shared by every definition:
//! - rates and ratios of counts use a `+1` denominator;
//! - per-tweet means and fractions over an empty timeline are 0;
//! - interval statistics need two tweets, otherwise they are 0 and
//!   `timeline_too_short` is 1;
//! - entropies are in bits and 0 for an empty distribution.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use chrono::{DateTime, Timelike, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{AccountPayload, TweetRecord, UserObject};
use crate::error::{Error, Result};
use crate::lexicon::{self, PartOfSpeech};

pub const REGISTRY_VERSION: &str = "desk-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureClass {
    UserProfile,
    Friends,
    Network,
    Temporal,
    ContentLanguage,
    Sentiment,
}

impl FeatureClass {
    pub const ALL: [FeatureClass; 6] = [
        FeatureClass::UserProfile,
        FeatureClass::Friends,
        FeatureClass::Network,
        FeatureClass::Temporal,
        FeatureClass::ContentLanguage,
        FeatureClass::Sentiment,
    ];

    pub fn is_language_dependent(self) -> bool {
        matches!(
            self,
            FeatureClass::ContentLanguage | FeatureClass::Sentiment
        )
    }
}

impl fmt::Display for FeatureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FeatureClass::UserProfile => "user_profile",
            FeatureClass::Friends => "friends",
            FeatureClass::Network => "network",
            FeatureClass::Temporal => "temporal",
            FeatureClass::ContentLanguage => "content_language",
            FeatureClass::Sentiment => "sentiment",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub class: FeatureClass,
    pub language_dependent: bool,
    pub lite_eligible: bool,
    pub definition: String,
}

/// Ordered feature list. Projections of the default registry carry a
/// `/<suffix>` on the version so vectors from different projections never mix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureRegistry {
    pub version: String,
    pub features: Vec<FeatureSpec>,
}

// (name, class, definition). Order is the column order of full vectors.
const TABLE: &[(&str, FeatureClass, &str)] = {
    use FeatureClass::*;
    &[
        ("screen_name_length", UserProfile, "number of characters in screen_name"),
        ("digits_in_screen_name", UserProfile, "number of ASCII digits in screen_name"),
        ("name_length", UserProfile, "number of characters in display_name"),
        ("description_length", UserProfile, "number of characters in the profile description"),
        ("account_age_days", UserProfile, "(probe_time - created_at) in days, fractional"),
        ("followers_count", UserProfile, "followers_count"),
        ("friends_count", UserProfile, "friends_count"),
        ("statuses_count", UserProfile, "statuses_count"),
        ("listed_count", UserProfile, "listed_count"),
        ("favourites_count", UserProfile, "favourites_count"),
        ("follower_friend_ratio", UserProfile, "followers_count / (friends_count + 1)"),
        ("tweets_per_day", UserProfile, "statuses_count / (account_age_days + 1)"),
        ("followers_per_day", UserProfile, "followers_count / (account_age_days + 1)"),
        ("verified", UserProfile, "1 if verified else 0"),
        ("default_profile", UserProfile, "1 if default_profile else 0"),
        ("default_profile_image", UserProfile, "1 if default_profile_image else 0"),
        ("profile_use_background_image", UserProfile, "1 if profile_use_background_image else 0"),
        ("unique_mentioned_users", Friends, "distinct user ids mentioned across timeline tweets"),
        ("unique_retweeted_users", Friends, "distinct retweeted_user_id values across timeline retweets"),
        ("mention_target_entropy", Friends, "Shannon entropy (bits) of the mentioned-user-id frequency distribution over the timeline"),
        ("retweet_fraction", Network, "retweets / timeline tweets"),
        ("reply_fraction", Network, "replies / timeline tweets"),
        ("self_reply_fraction", Network, "replies whose replied_user_id is the account itself / timeline tweets"),
        ("interlocutor_diversity", Network, "distinct other accounts retweeted, replied to or mentioned / total such interactions"),
        ("mentions_received", Network, "number of tweets by others mentioning the account"),
        ("unique_mentioners", Network, "distinct authors of tweets mentioning the account"),
        ("mean_interval_s", Temporal, "mean gap in seconds between consecutive timeline tweets"),
        ("std_interval_s", Temporal, "population standard deviation of the gaps"),
        ("min_interval_s", Temporal, "smallest gap in seconds"),
        ("burstiness", Temporal, "(std - mean) / (std + mean) of the gaps, 0 when both are 0"),
        ("hour_entropy", Temporal, "Shannon entropy (bits) of timeline tweets over the 24 UTC hours"),
        ("timeline_too_short", Temporal, "1 if the timeline has fewer than 2 tweets else 0"),
        ("days_since_last_tweet", Temporal, "(probe_time - newest timeline tweet) in days"),
        ("mean_words", ContentLanguage, "mean whitespace-separated tokens per tweet"),
        ("mean_chars", ContentLanguage, "mean characters per tweet"),
        ("hashtags_per_tweet", ContentLanguage, "hashtag entities / timeline tweets"),
        ("urls_per_tweet", ContentLanguage, "url entities / timeline tweets"),
        ("mentions_per_tweet", ContentLanguage, "user-mention entities / timeline tweets"),
        ("duplicate_text_fraction", ContentLanguage, "1 - distinct texts / timeline tweets"),
        ("nouns_per_tweet", ContentLanguage, "lexicon nouns / timeline tweets"),
        ("verbs_per_tweet", ContentLanguage, "lexicon verbs / timeline tweets"),
        ("adjectives_per_tweet", ContentLanguage, "lexicon adjectives / timeline tweets"),
        ("valence_mean", Sentiment, "mean over tweets of the mean lexicon valence of the tweet's words (0 for a tweet without hits)"),
        ("valence_std", Sentiment, "population standard deviation of the per-tweet valence"),
    ]
};

const PROFILE_LEN: usize = 17;

fn column_index() -> &'static HashMap<&'static str, usize> {
    static INDEX: OnceLock<HashMap<&'static str, usize>> = OnceLock::new();
    INDEX.get_or_init(|| {
        TABLE
            .iter()
            .enumerate()
            .map(|(i, (n, _, _))| (*n, i))
            .collect()
    })
}

/// The versioned registry covering all six classes.
pub fn default_registry() -> FeatureRegistry {
    let features = TABLE
        .iter()
        .map(|&(name, class, definition)| FeatureSpec {
            name: name.to_string(),
            class,
            language_dependent: class.is_language_dependent(),
            lite_eligible: class == FeatureClass::UserProfile,
            definition: definition.to_string(),
        })
        .collect();
    FeatureRegistry {
        version: REGISTRY_VERSION.to_string(),
        features,
    }
}

impl FeatureRegistry {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.features.iter().map(|f| f.name.as_str())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Version of the extractor this registry was derived from.
    pub fn base_version(&self) -> &str {
        self.version.split('/').next().unwrap_or(&self.version)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for f in &self.features {
            if !seen.insert(f.name.as_str()) {
                return Err(Error::Invalid(format!("duplicate feature {}", f.name)));
            }
            if f.language_dependent != f.class.is_language_dependent() {
                return Err(Error::Invalid(format!(
                    "feature {} of class {} has language_dependent = {}",
                    f.name, f.class, f.language_dependent
                )));
            }
            if f.lite_eligible && f.class != FeatureClass::UserProfile {
                return Err(Error::Invalid(format!(
                    "feature {} is lite eligible but not a user_profile feature",
                    f.name
                )));
            }
        }
        Ok(())
    }

    /// Keeps features matching `keep`, tagging the version with `suffix`.
    pub fn project(&self, suffix: &str, keep: impl Fn(&FeatureSpec) -> bool) -> FeatureRegistry {
        FeatureRegistry {
            version: format!("{}/{suffix}", self.base_version()),
            features: self.features.iter().filter(|f| keep(f)).cloned().collect(),
        }
    }

    /// Language-independent projection used by the universal classifiers.
    pub fn universal(&self) -> FeatureRegistry {
        self.project("universal", |f| !f.language_dependent)
    }

    /// Metadata-only projection.
    pub fn lite(&self) -> FeatureRegistry {
        self.project("lite", |f| f.lite_eligible)
    }

    /// Column indices of `sub`'s features within `self`.
    pub fn columns_of(&self, sub: &FeatureRegistry) -> Result<Vec<usize>> {
        sub.features
            .iter()
            .map(|f| {
                self.position(&f.name).ok_or_else(|| {
                    Error::Invalid(format!(
                        "feature {} not in registry {}",
                        f.name, self.version
                    ))
                })
            })
            .collect()
    }

    pub fn check_version(&self, version: &str) -> Result<()> {
        if self.version != version {
            return Err(Error::VersionMismatch {
                expected: self.version.clone(),
                found: version.to_string(),
            });
        }
        Ok(())
    }

    fn table_columns(&self) -> Result<Vec<usize>> {
        if self.base_version() != REGISTRY_VERSION {
            return Err(Error::VersionMismatch {
                expected: REGISTRY_VERSION.to_string(),
                found: self.version.clone(),
            });
        }
        let index = column_index();
        self.features
            .iter()
            .map(|f| {
                index
                    .get(f.name.as_str())
                    .copied()
                    .ok_or_else(|| Error::Invalid(format!("unknown feature {}", f.name)))
            })
            .collect()
    }
}

/// Values aligned with a registry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub registry_version: String,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn project(&self, columns: &[usize], registry_version: &str) -> FeatureVector {
        FeatureVector {
            values: columns.iter().map(|&c| self.values[c]).collect(),
            registry_version: registry_version.to_string(),
        }
    }
}

/// Extracts every feature in `registry` from a payload.
pub fn extract_full(payload: &AccountPayload, registry: &FeatureRegistry) -> Result<FeatureVector> {
    let columns = registry.table_columns()?;
    let all = compute_all(payload);
    Ok(FeatureVector {
        values: columns.iter().map(|&c| all[c]).collect(),
        registry_version: registry.version.clone(),
    })
}

/// Extracts the lite-eligible features of `registry` from metadata alone.
/// The result is aligned with `registry.lite()`.
pub fn extract_lite(
    user: &UserObject,
    probe_time: DateTime<Utc>,
    registry: &FeatureRegistry,
) -> Result<FeatureVector> {
    if probe_time < user.created_at {
        return Err(Error::Invalid(format!(
            "probe_time {probe_time} precedes creation of {}",
            user.user_id
        )));
    }
    let lite = if registry.version.ends_with("/lite") {
        registry.clone()
    } else {
        registry.lite()
    };
    let columns = lite.table_columns()?;
    let profile = profile_features(user, probe_time);
    let values = columns
        .iter()
        .map(|&c| {
            profile.get(c).copied().ok_or_else(|| {
                Error::Invalid(format!("feature {} is not metadata-only", TABLE[c].0))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureVector {
        values,
        registry_version: lite.version,
    })
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn profile_features(user: &UserObject, probe_time: DateTime<Utc>) -> [f64; PROFILE_LEN] {
    let age_days = (probe_time - user.created_at).num_seconds().max(0) as f64 / 86_400.0;
    let followers = user.followers_count as f64;
    let friends = user.friends_count as f64;
    let statuses = user.statuses_count as f64;
    [
        user.screen_name.chars().count() as f64,
        user.screen_name
            .chars()
            .filter(char::is_ascii_digit)
            .count() as f64,
        user.display_name.chars().count() as f64,
        user.description.chars().count() as f64,
        age_days,
        followers,
        friends,
        statuses,
        user.listed_count as f64,
        user.favourites_count as f64,
        followers / (friends + 1.0),
        statuses / (age_days + 1.0),
        followers / (age_days + 1.0),
        flag(user.verified),
        flag(user.default_profile),
        flag(user.default_profile_image),
        flag(user.profile_use_background_image),
    ]
}

fn entropy_bits<I: IntoIterator<Item = usize>>(counts: I) -> f64 {
    let counts: Vec<usize> = counts.into_iter().filter(|&c| c > 0).collect();
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>()
        .max(0.0)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn per_tweet(total: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        total as f64 / n as f64
    }
}

fn tweet_valence(tweet: &TweetRecord) -> f64 {
    let lex = lexicon::lexicon();
    let hits: Vec<f64> = tweet
        .text
        .split_whitespace()
        .filter_map(lexicon::normalize_token)
        .filter_map(|w| lex.valence(&w))
        .collect();
    mean_std(&hits).0
}

fn compute_all(payload: &AccountPayload) -> Vec<f64> {
    let user = &payload.user;
    let timeline = &payload.timeline;
    let n = timeline.len();
    let mut out = Vec::with_capacity(TABLE.len());
    out.extend_from_slice(&profile_features(user, payload.probe_time));

    // friends
    let mut mention_counts: HashMap<&str, usize> = HashMap::new();
    let mut retweeted: HashSet<&str> = HashSet::new();
    for t in timeline {
        for m in &t.entities.user_mentions {
            *mention_counts.entry(m.as_str()).or_default() += 1;
        }
        if let (true, Some(src)) = (t.is_retweet, t.retweeted_user_id.as_deref()) {
            retweeted.insert(src);
        }
    }
    // Sort so the floating-point summation order is fixed.
    let mut mention_freq: Vec<usize> = mention_counts.values().copied().collect();
    mention_freq.sort_unstable();
    out.push(mention_counts.len() as f64);
    out.push(retweeted.len() as f64);
    out.push(entropy_bits(mention_freq));

    // network
    let retweets = timeline.iter().filter(|t| t.is_retweet).count();
    let replies = timeline.iter().filter(|t| t.is_reply).count();
    let self_replies = timeline
        .iter()
        .filter(|t| t.is_reply && t.replied_user_id.as_deref() == Some(user.user_id.as_str()))
        .count();
    let mut interactions = 0usize;
    let mut interlocutors: HashSet<&str> = HashSet::new();
    for t in timeline {
        let ids = t
            .retweeted_user_id
            .iter()
            .chain(t.replied_user_id.iter())
            .chain(t.entities.user_mentions.iter());
        for id in ids.filter(|id| **id != user.user_id) {
            interactions += 1;
            interlocutors.insert(id);
        }
    }
    let mentioners: HashSet<&str> = payload
        .mentions
        .iter()
        .map(|t| t.author.user_id.as_str())
        .collect();
    out.push(per_tweet(retweets, n));
    out.push(per_tweet(replies, n));
    out.push(per_tweet(self_replies, n));
    out.push(per_tweet(interlocutors.len(), interactions));
    out.push(payload.mentions.len() as f64);
    out.push(mentioners.len() as f64);

    // temporal
    let mut times: Vec<i64> = timeline.iter().map(|t| t.created_at.timestamp()).collect();
    times.sort_unstable();
    let gaps: Vec<f64> = times.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    let (gap_mean, gap_std) = mean_std(&gaps);
    let gap_min = gaps
        .iter()
        .copied()
        .fold(None, |m: Option<f64>, g| Some(m.map_or(g, |m| m.min(g))));
    let burstiness = if gap_std + gap_mean > 0.0 {
        (gap_std - gap_mean) / (gap_std + gap_mean)
    } else {
        0.0
    };
    let mut hours = [0usize; 24];
    for t in timeline {
        hours[t.created_at.hour() as usize] += 1;
    }
    let newest = timeline.iter().map(|t| t.created_at).max();
    out.push(gap_mean);
    out.push(gap_std);
    out.push(gap_min.unwrap_or(0.0));
    out.push(burstiness);
    out.push(entropy_bits(hours));
    out.push(flag(n < 2));
    out.push(newest.map_or(0.0, |t| {
        (payload.probe_time - t).num_seconds() as f64 / 86_400.0
    }));

    // content & language
    let lex = lexicon::lexicon();
    let (mut words, mut chars, mut hashtags, mut urls, mut mentions) = (0, 0, 0, 0, 0);
    let (mut nouns, mut verbs, mut adjectives) = (0, 0, 0);
    let mut distinct_texts: HashSet<&str> = HashSet::new();
    for t in timeline {
        words += t.text.split_whitespace().count();
        chars += t.text.chars().count();
        hashtags += t.entities.hashtags.len();
        urls += t.entities.urls.len();
        mentions += t.entities.user_mentions.len();
        distinct_texts.insert(t.text.as_str());
        for w in t
            .text
            .split_whitespace()
            .filter_map(lexicon::normalize_token)
        {
            match lex.part_of_speech(&w) {
                Some(PartOfSpeech::Noun) => nouns += 1,
                Some(PartOfSpeech::Verb) => verbs += 1,
                Some(PartOfSpeech::Adjective) => adjectives += 1,
                None => {}
            }
        }
    }
    out.push(per_tweet(words, n));
    out.push(per_tweet(chars, n));
    out.push(per_tweet(hashtags, n));
    out.push(per_tweet(urls, n));
    out.push(per_tweet(mentions, n));
    out.push(if n == 0 {
        0.0
    } else {
        1.0 - distinct_texts.len() as f64 / n as f64
    });
    out.push(per_tweet(nouns, n));
    out.push(per_tweet(verbs, n));
    out.push(per_tweet(adjectives, n));

    // sentiment
    let valences: Vec<f64> = timeline.iter().map(tweet_valence).collect();
    let (v_mean, v_std) = mean_std(&valences);
    out.push(v_mean);
    out.push(v_std);

    debug_assert_eq!(out.len(), TABLE.len());
    for v in &mut out {
        if !v.is_finite() {
            *v = 0.0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::{tweet, user};
    use chrono::TimeZone;

    fn value(v: &FeatureVector, reg: &FeatureRegistry, name: &str) -> f64 {
        v.values[reg.position(name).unwrap()]
    }

    #[test]
    fn registry_covers_six_classes() {
        let reg = default_registry();
        reg.validate().unwrap();
        for class in FeatureClass::ALL {
            assert!(reg.features.iter().any(|f| f.class == class), "{class}");
        }
        assert!(reg
            .features
            .iter()
            .filter(|f| f.class == FeatureClass::Sentiment)
            .all(|f| f.language_dependent));
        let lite = reg.lite();
        assert!(!lite.is_empty());
        assert!(lite
            .features
            .iter()
            .all(|f| f.class == FeatureClass::UserProfile));
        assert!(reg
            .universal()
            .features
            .iter()
            .all(|f| !f.language_dependent));
    }

    #[test]
    fn registry_validation_catches_bad_flags() {
        let mut reg = default_registry();
        let last = reg.features.len() - 1;
        reg.features[last].language_dependent = false;
        assert!(reg.validate().is_err());

        let mut reg = default_registry();
        reg.features[20].lite_eligible = true;
        assert!(reg.validate().is_err());

        let mut reg = default_registry();
        let dup = reg.features[0].clone();
        reg.features.push(dup);
        assert!(reg.validate().is_err());
    }

    #[test]
    fn screen_name_features() {
        let reg = default_registry();
        let mut u = user("1");
        u.screen_name = "yang3kc".into();
        let p = AccountPayload {
            probe_time: u.created_at,
            user: u,
            timeline: vec![],
            mentions: vec![],
        };
        let v = extract_full(&p, &reg).unwrap();
        assert_eq!(value(&v, &reg, "screen_name_length"), 7.0);
        assert_eq!(value(&v, &reg, "digits_in_screen_name"), 1.0);
    }

    #[test]
    fn age_and_ratios() {
        let reg = default_registry();
        let mut u = user("1");
        u.created_at = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap();
        u.followers_count = 100;
        u.friends_count = 49;
        u.statuses_count = 300;
        let probe = Utc.with_ymd_and_hms(2020, 1, 31, 0, 0, 0).unwrap();
        let v = extract_lite(&u, probe, &reg).unwrap();
        let lite = reg.lite();
        assert_eq!(value(&v, &lite, "account_age_days"), 30.0);
        assert_eq!(value(&v, &lite, "follower_friend_ratio"), 2.0);
        assert!((value(&v, &lite, "tweets_per_day") - 300.0 / 31.0).abs() < 1e-12);
        assert!((value(&v, &lite, "tweets_per_day") - 9.677).abs() < 1e-3);
    }

    #[test]
    fn brand_new_account_has_zero_rate() {
        let reg = default_registry();
        let mut u = user("1");
        u.statuses_count = 0;
        let v = extract_lite(&u, u.created_at, &reg).unwrap();
        assert_eq!(value(&v, &reg.lite(), "tweets_per_day"), 0.0);
    }

    #[test]
    fn lite_rejects_probe_before_creation() {
        let u = user("1");
        let early = u.created_at - chrono::Duration::seconds(1);
        assert!(extract_lite(&u, early, &default_registry()).is_err());
    }

    #[test]
    fn empty_timeline_imputation() {
        let reg = default_registry();
        let u = user("1");
        let p = AccountPayload {
            probe_time: u.created_at + chrono::Duration::days(3),
            user: u,
            timeline: vec![],
            mentions: vec![],
        };
        let v = extract_full(&p, &reg).unwrap();
        assert_eq!(value(&v, &reg, "timeline_too_short"), 1.0);
        for name in [
            "mean_interval_s",
            "hour_entropy",
            "mention_target_entropy",
            "valence_std",
        ] {
            assert_eq!(value(&v, &reg, name), 0.0, "{name}");
        }
        assert!(v.values.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn version_mismatch_rejected() {
        let mut reg = default_registry();
        reg.version = "desk-v0".into();
        let u = user("1");
        let p = AccountPayload {
            probe_time: u.created_at,
            user: u,
            timeline: vec![],
            mentions: vec![],
        };
        assert!(matches!(
            extract_full(&p, &reg),
            Err(Error::VersionMismatch { .. })
        ));
    }

    #[test]
    fn projection_versions_and_columns() {
        let reg = default_registry();
        let uni = reg.universal();
        assert_eq!(uni.version, "desk-v1/universal");
        let cols = reg.columns_of(&uni).unwrap();
        assert_eq!(cols.len(), uni.len());
        let u = user("1");
        let p = AccountPayload {
            probe_time: u.created_at + chrono::Duration::days(1),
            timeline: vec![tweet("a", &u, 1)],
            user: u,
            mentions: vec![],
        };
        let full = extract_full(&p, &reg).unwrap();
        assert_eq!(
            full.project(&cols, &uni.version),
            extract_full(&p, &uni).unwrap()
        );
    }

    #[test]
    fn entropy_of_uniform_is_log2() {
        assert_eq!(entropy_bits([1, 1, 1, 1]), 2.0);
        assert_eq!(entropy_bits([5]), 0.0);
        assert_eq!(entropy_bits(Vec::<usize>::new()), 0.0);
    }
}
