//! Seeded generator for labeled account corpora.
//!
//! Each archetype draws its profile counts, posting cadence and tweet content
//! from ranges in a [`CorpusSpec`]. The shipped `fixtures/corpus.toml` holds
//! the parameter set used by the tests and examples.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, Utc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    AccountPayload, BotClass, Entities, Label, LabeledDataset, LabeledRecord, TweetRecord,
    UserObject, MAX_TIMELINE,
};
use crate::error::{Error, Result};
use crate::lexicon;

const FIXTURE: &str = include_str!("../../fixtures/corpus.toml");
const MIXED: &str = include_str!("../../fixtures/mixed.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    Human,
    Spammer,
    FakeFollower,
    SelfDeclared,
    Astroturf,
}

impl Archetype {
    pub const ALL: [Archetype; 5] = [
        Archetype::Human,
        Archetype::Spammer,
        Archetype::FakeFollower,
        Archetype::SelfDeclared,
        Archetype::Astroturf,
    ];

    pub fn label(self) -> Label {
        match self {
            Archetype::Human => Label::Human,
            _ => Label::Bot,
        }
    }

    pub fn bot_class(self) -> Option<BotClass> {
        match self {
            Archetype::Human => None,
            Archetype::Spammer => Some(BotClass::Spammer),
            Archetype::FakeFollower => Some(BotClass::FakeFollower),
            Archetype::SelfDeclared => Some(BotClass::SelfDeclared),
            Archetype::Astroturf => Some(BotClass::Astroturf),
        }
    }

    fn id_prefix(self) -> &'static str {
        match self {
            Archetype::Human => "hu",
            Archetype::Spammer => "sp",
            Archetype::FakeFollower => "ff",
            Archetype::SelfDeclared => "sd",
            Archetype::Astroturf => "at",
        }
    }
}

/// Inclusive `[lo, hi]` interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range(pub f64, pub f64);

impl Range {
    fn uniform(self, rng: &mut impl Rng) -> f64 {
        if self.1 <= self.0 {
            self.0
        } else {
            rng.gen_range(self.0..=self.1)
        }
    }

    /// Log-uniform draw on `[lo+1, hi+1]`, shifted back; suits heavy-tailed counts.
    fn log_uniform(self, rng: &mut impl Rng) -> f64 {
        let lo = (self.0 + 1.0).ln();
        let hi = (self.1 + 1.0).ln();
        Range(lo, hi).uniform(rng).exp() - 1.0
    }

    fn count(self, rng: &mut impl Rng) -> u64 {
        self.log_uniform(rng).round().max(0.0) as u64
    }

    fn int(self, rng: &mut impl Rng) -> usize {
        self.uniform(rng).round().max(0.0) as usize
    }
}

/// Generation parameters for one archetype. Probabilities are per account for
/// profile flags and per tweet for tweet-level behaviour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchetypeParams {
    pub age_days: Range,
    pub tweets_per_day: Range,
    pub timeline: Range,
    pub followers: Range,
    pub friends: Range,
    pub listed: Range,
    pub favourites: Range,
    pub screen_name_digits: Range,
    pub verified: f64,
    pub default_profile: f64,
    pub default_profile_image: f64,
    pub background_image: f64,
    pub description: f64,
    /// Log-normal sigma of inter-tweet gaps; 0 means clockwork posting.
    pub interval_jitter: f64,
    pub retweet: f64,
    pub reply: f64,
    pub self_reply: f64,
    pub mention: f64,
    pub hashtags: f64,
    pub urls: f64,
    pub cashtags: f64,
    pub duplicate: f64,
    pub words: Range,
    /// In [-1, 1]; shifts sentiment word choice.
    pub valence_bias: f64,
    /// Number of distinct accounts this archetype retweets, replies to, or mentions.
    pub interlocutors: usize,
    pub mentions_received: Range,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub version: String,
    pub name: String,
    pub probe_time: DateTime<Utc>,
    #[serde(default)]
    pub counts: BTreeMap<Archetype, u32>,
    pub archetypes: BTreeMap<Archetype, ArchetypeParams>,
}

impl CorpusSpec {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    /// The shipped archetype parameter set.
    pub fn fixture() -> Self {
        Self::from_toml_str(FIXTURE).expect("shipped corpus fixture parses")
    }

    /// Bot archetypes pulled most of the way toward humans, so classes overlap.
    pub fn mixed() -> Self {
        Self::from_toml_str(MIXED).expect("shipped mixed fixture parses")
    }

    pub fn with_count(mut self, archetype: Archetype, n: u32) -> Self {
        self.counts.insert(archetype, n);
        self
    }

    pub fn with_counts(mut self, counts: &[(Archetype, u32)]) -> Self {
        self.counts = counts.iter().copied().collect();
        self
    }

    pub fn total(&self) -> usize {
        self.counts.values().map(|&n| n as usize).sum()
    }
}

/// Generates a labeled corpus. Output is a pure function of `(spec, seed)`.
pub fn synthesize_corpus(spec: &CorpusSpec, seed: u64) -> Result<LabeledDataset> {
    let mut records = Vec::with_capacity(spec.total());
    for (stream, archetype) in Archetype::ALL.into_iter().enumerate() {
        let n = spec.counts.get(&archetype).copied().unwrap_or(0);
        if n == 0 {
            continue;
        }
        let params = spec
            .archetypes
            .get(&archetype)
            .ok_or_else(|| Error::Config(format!("no parameters for archetype {archetype:?}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream as u64);
        for i in 0..n as usize {
            let gen = AccountGen {
                archetype,
                params,
                probe_time: spec.probe_time,
                index: i,
            };
            records.push(LabeledRecord {
                payload: gen.payload(&mut rng),
                label: archetype.label(),
                bot_class: archetype.bot_class(),
            });
        }
    }
    LabeledDataset::new(spec.name.clone(), records)
}

const FIRST_NAMES: &[&str] = &[
    "Ana", "Ben", "Chloe", "Dev", "Elif", "Femi", "Grace", "Hiro", "Ines", "Jonas", "Kaia", "Liam",
    "Maya", "Noor", "Omar", "Priya", "Quinn", "Rosa", "Sven", "Tara",
];
const LAST_NAMES: &[&str] = &[
    "Smith", "Okafor", "Tanaka", "Silva", "Kowalski", "Nguyen", "Haddad", "Jensen", "Moreau",
    "Reyes",
];
const HASHTAGS: &[&str] = &[
    "news", "crypto", "giveaway", "music", "tbt", "follow", "nft", "deal", "monday", "sports",
];
const CASHTAGS: &[&str] = &["BTC", "ETH", "SHIB", "DOGE", "AAPL", "TSLA"];
const FILLER: &[&str] = &[
    "the", "a", "to", "and", "of", "in", "is", "it", "for", "on", "my", "this", "so", "just",
];

struct AccountGen<'a> {
    archetype: Archetype,
    params: &'a ArchetypeParams,
    probe_time: DateTime<Utc>,
    index: usize,
}

impl AccountGen<'_> {
    fn user_id(&self) -> String {
        format!("{}{:06}", self.archetype.id_prefix(), self.index)
    }

    fn payload(&self, rng: &mut ChaCha8Rng) -> AccountPayload {
        let p = self.params;
        let age_days = p.age_days.uniform(rng);
        let created_at = self.probe_time - Duration::seconds((age_days * 86_400.0) as i64);
        let tweets_per_day = p.tweets_per_day.log_uniform(rng);
        let user = self.user(rng, created_at, age_days, tweets_per_day);

        let wanted = p.timeline.int(rng).min(MAX_TIMELINE);
        let wanted = wanted.min(user.statuses_count as usize);
        let mean_gap = 86_400.0 / tweets_per_day.max(1e-3);
        let templates: Vec<String> = (0..3).map(|_| self.text(rng)).collect();

        let mut timeline = Vec::with_capacity(wanted);
        let mut t = self.probe_time - Duration::seconds((rng.gen::<f64>() * mean_gap) as i64 + 1);
        for k in 0..wanted {
            if t < created_at {
                break;
            }
            timeline.push(self.tweet(rng, &user, t, k, &templates));
            let gap = mean_gap * lognormal(rng, p.interval_jitter);
            t -= Duration::seconds(gap.max(1.0) as i64);
        }

        let received = p.mentions_received.int(rng);
        let mentions = (0..received).map(|k| self.mention(rng, &user, k)).collect();

        AccountPayload {
            user,
            timeline,
            mentions,
            probe_time: self.probe_time,
        }
    }

    fn user(
        &self,
        rng: &mut ChaCha8Rng,
        created_at: DateTime<Utc>,
        age_days: f64,
        tweets_per_day: f64,
    ) -> UserObject {
        let p = self.params;
        let first = FIRST_NAMES.choose(rng).unwrap();
        let last = LAST_NAMES.choose(rng).unwrap();
        let digits = p.screen_name_digits.int(rng);
        let mut screen_name = match self.archetype {
            Archetype::Human => format!("{}{}", first.to_lowercase(), last[..3].to_lowercase()),
            _ => (0..rng.gen_range(4..9))
                .map(|_| rng.gen_range(b'a'..=b'z') as char)
                .collect(),
        };
        for _ in 0..digits {
            screen_name.push(char::from(b'0' + rng.gen_range(0..10u8)));
        }
        let display_name = match self.archetype {
            Archetype::Human => format!("{first} {last}"),
            _ => screen_name.to_uppercase(),
        };
        let description = if rng.gen_bool(p.description) {
            let mut d = self.words(rng, Range(4.0, 16.0));
            if self.archetype == Archetype::SelfDeclared {
                d = format!("automated account run by a bot. {d}");
            }
            d
        } else {
            String::new()
        };
        UserObject {
            user_id: self.user_id(),
            screen_name,
            display_name,
            created_at,
            followers_count: p.followers.count(rng),
            friends_count: p.friends.count(rng),
            statuses_count: ((tweets_per_day * age_days).round() as u64).max(1),
            listed_count: p.listed.count(rng),
            favourites_count: p.favourites.count(rng),
            verified: rng.gen_bool(p.verified),
            default_profile: rng.gen_bool(p.default_profile),
            default_profile_image: rng.gen_bool(p.default_profile_image),
            profile_use_background_image: rng.gen_bool(p.background_image),
            description,
            declared_language: Some("en".into()),
        }
    }

    fn interlocutor(&self, rng: &mut ChaCha8Rng) -> String {
        let k = rng.gen_range(0..self.params.interlocutors.max(1));
        format!("{}x{:04}", self.archetype.id_prefix(), k)
    }

    fn tweet(
        &self,
        rng: &mut ChaCha8Rng,
        user: &UserObject,
        at: DateTime<Utc>,
        k: usize,
        templates: &[String],
    ) -> TweetRecord {
        let p = self.params;
        let mut entities = Entities::default();
        let (mut is_retweet, mut is_reply) = (false, false);
        let (mut retweeted_user_id, mut replied_user_id) = (None, None);

        let mut text = if rng.gen_bool(p.duplicate) {
            templates.choose(rng).unwrap().clone()
        } else {
            self.text(rng)
        };
        if rng.gen_bool(p.retweet) {
            let source = self.interlocutor(rng);
            text = format!("RT {text}");
            is_retweet = true;
            retweeted_user_id = Some(source);
        } else if rng.gen_bool(p.reply) {
            let target = if rng.gen_bool(p.self_reply) {
                user.user_id.clone()
            } else {
                self.interlocutor(rng)
            };
            is_reply = true;
            replied_user_id = Some(target);
        }
        if rng.gen_bool(p.mention) {
            entities.user_mentions.push(self.interlocutor(rng));
        }
        for _ in 0..poisson_ish(rng, p.hashtags) {
            let tag = HASHTAGS.choose(rng).unwrap();
            text.push_str(&format!(" #{tag}"));
            entities.hashtags.push(tag.to_string());
        }
        for _ in 0..poisson_ish(rng, p.urls) {
            let url = format!("https://t.co/{:08x}", rng.gen::<u32>());
            text.push(' ');
            text.push_str(&url);
            entities.urls.push(url);
        }
        for _ in 0..poisson_ish(rng, p.cashtags) {
            let sym = CASHTAGS.choose(rng).unwrap();
            text.push_str(&format!(" ${sym}"));
            entities.cashtags.push(sym.to_string());
        }
        TweetRecord {
            tweet_id: format!("{}t{k:03}", user.user_id),
            author: user.clone(),
            created_at: at,
            text,
            lang: Some("en".into()),
            entities,
            is_retweet,
            is_reply,
            retweeted_user_id,
            replied_user_id,
        }
    }

    fn mention(&self, rng: &mut ChaCha8Rng, user: &UserObject, k: usize) -> TweetRecord {
        let span = (self.probe_time - user.created_at).num_seconds().max(1);
        let at = user.created_at + Duration::seconds(rng.gen_range(0..=span));
        let mut author = UserObject {
            user_id: format!("{}m{k:03}", user.user_id),
            screen_name: format!("fan{k}"),
            display_name: "Fan".into(),
            created_at: at - Duration::days(rng.gen_range(1..2000)),
            followers_count: rng.gen_range(0..500),
            friends_count: rng.gen_range(0..500),
            statuses_count: rng.gen_range(1..5000),
            listed_count: 0,
            favourites_count: 0,
            verified: false,
            default_profile: false,
            default_profile_image: false,
            profile_use_background_image: true,
            description: String::new(),
            declared_language: None,
        };
        author.screen_name.push_str(&author.user_id);
        TweetRecord {
            tweet_id: format!("{}r{k:03}", user.user_id),
            author,
            created_at: at,
            text: format!(
                "@{} {}",
                user.screen_name,
                self.words(rng, Range(3.0, 10.0))
            ),
            lang: Some("en".into()),
            entities: Entities {
                user_mentions: vec![user.user_id.clone()],
                ..Entities::default()
            },
            is_retweet: false,
            is_reply: false,
            retweeted_user_id: None,
            replied_user_id: None,
        }
    }

    fn text(&self, rng: &mut ChaCha8Rng) -> String {
        self.words(rng, self.params.words)
    }

    fn words(&self, rng: &mut ChaCha8Rng, n: Range) -> String {
        let lex = lexicon::lexicon();
        let n = n.int(rng).max(1);
        let bias = self.params.valence_bias.clamp(-1.0, 1.0);
        let mut out: Vec<&str> = Vec::with_capacity(n);
        for _ in 0..n {
            let roll: f64 = rng.gen();
            let word = if roll < 0.35 {
                FILLER.choose(rng).unwrap()
            } else if roll < 0.45 {
                let positive = rng.gen_bool((0.5 + bias / 2.0).clamp(0.0, 1.0));
                let pool = if positive {
                    lex.positive_words()
                } else {
                    lex.negative_words()
                };
                pool.choose(rng).copied().unwrap_or("ok")
            } else {
                lex.content_words().choose(rng).copied().unwrap_or("thing")
            };
            out.push(word);
        }
        out.join(" ")
    }
}

fn poisson_ish(rng: &mut impl Rng, mean: f64) -> usize {
    let whole = mean.floor();
    let frac = mean - whole;
    whole as usize + usize::from(rng.gen_bool(frac.clamp(0.0, 1.0)))
}

/// Mean-one log-normal multiplier.
fn lognormal(rng: &mut impl Rng, sigma: f64) -> f64 {
    if sigma <= 0.0 {
        return 1.0;
    }
    // Box-Muller
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
    (sigma * z - sigma * sigma / 2.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(humans: u32, spammers: u32) -> CorpusSpec {
        CorpusSpec::fixture()
            .with_counts(&[(Archetype::Human, humans), (Archetype::Spammer, spammers)])
    }

    #[test]
    fn fixture_covers_every_archetype() {
        let spec = CorpusSpec::fixture();
        for a in Archetype::ALL {
            assert!(spec.archetypes.contains_key(&a), "{a:?}");
        }
    }

    #[test]
    fn deterministic_bytes() {
        let a = synthesize_corpus(&spec(50, 50), 42).unwrap();
        let b = synthesize_corpus(&spec(50, 50), 42).unwrap();
        let bytes = |d: &LabeledDataset| serde_json::to_vec(d.records()).unwrap();
        assert_eq!(bytes(&a), bytes(&b));
        let c = synthesize_corpus(&spec(50, 50), 43).unwrap();
        assert_ne!(bytes(&a), bytes(&c));
    }

    #[test]
    fn zero_counts_yield_empty_dataset() {
        let ds = synthesize_corpus(&spec(0, 0), 1).unwrap();
        assert!(ds.is_empty());
        let ds = synthesize_corpus(&CorpusSpec::fixture().with_counts(&[]), 1).unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn negative_count_is_a_config_error() {
        let text = FIXTURE.to_string() + "\n";
        let text = text.replacen("spammer = 100", "spammer = -3", 1);
        assert!(matches!(
            CorpusSpec::from_toml_str(&text),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn labels_and_classes_follow_archetype() {
        let ds = synthesize_corpus(&spec(5, 7), 3).unwrap();
        assert_eq!(ds.counts(), (7, 5));
        for r in ds.records() {
            match r.label {
                Label::Human => assert!(r.bot_class.is_none()),
                Label::Bot => assert_eq!(r.bot_class, Some(BotClass::Spammer)),
            }
        }
    }

    #[test]
    fn counts_per_archetype_independent_streams() {
        // Adding spammers must not perturb the humans drawn for the same seed.
        let a = synthesize_corpus(&spec(10, 0), 9).unwrap();
        let b = synthesize_corpus(&spec(10, 20), 9).unwrap();
        assert_eq!(&a.records()[..10], &b.records()[..10]);
    }
}
