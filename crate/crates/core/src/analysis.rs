//! Case-study statistics over scored tweets.
//!
//! A group of tweets (say, everything mentioning one cashtag) becomes an
//! [`AnalyticalSample`] once every author has a score and, optionally, accounts
//! whose tweets are mostly in another language are dropped. Samples are then
//! compared by their score distributions and by the share of tweets whose
//! author scores strictly above a threshold.
//!
//! The unit of analysis is the tweet by default: an account that tweeted five
//! times counts five times. [`Unit::Account`] counts each account once.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::corpus::{read_jsonl, Label, TweetRecord};
use crate::ensemble::ScoreReport;
use crate::error::{Error, Result};
use crate::forest::Confusion;

pub use crate::stats::{mann_whitney_u, two_proportion_z, Method, Stars, TestResult};

/// Thresholds used when none are given.
pub const DEFAULT_THRESHOLDS: [f64; 2] = [0.5, 0.7];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    #[default]
    Tweet,
    Account,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTweet {
    pub tweet_id: String,
    pub user_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub raw_tweets: usize,
    pub raw_accounts: usize,
    pub tweets: usize,
    pub accounts: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticalSample {
    pub group_name: String,
    pub tweets: Vec<SampleTweet>,
    /// One score per distinct author.
    pub accounts: BTreeMap<String, f64>,
    pub language_filter: Option<String>,
    pub raw_tweets: usize,
    pub raw_accounts: usize,
}

impl AnalyticalSample {
    pub fn counts(&self) -> SampleCounts {
        SampleCounts {
            raw_tweets: self.raw_tweets,
            raw_accounts: self.raw_accounts,
            tweets: self.tweets.len(),
            accounts: self.accounts.len(),
        }
    }

    /// Scores at the chosen unit of analysis.
    pub fn scores(&self, unit: Unit) -> Vec<f64> {
        match unit {
            Unit::Tweet => self.tweets.iter().map(|t| t.score).collect(),
            Unit::Account => self.accounts.values().copied().collect(),
        }
    }

    pub fn check(&self) -> Result<()> {
        let authors: BTreeSet<&str> = self.tweets.iter().map(|t| t.user_id.as_str()).collect();
        if !authors
            .iter()
            .copied()
            .eq(self.accounts.keys().map(String::as_str))
        {
            return Err(Error::Invalid(format!(
                "{}: account set differs from tweet authors",
                self.group_name
            )));
        }
        for t in &self.tweets {
            if self.accounts[&t.user_id] != t.score {
                return Err(Error::Invalid(format!(
                    "tweet {} disagrees with its account score",
                    t.tweet_id
                )));
            }
        }
        Ok(())
    }
}

/// Majority tweet language per author. Ties go to the author's declared
/// language when it is among the tied, otherwise to `"und"`.
pub fn account_languages(tweets: &[TweetRecord]) -> BTreeMap<String, String> {
    let mut tally: BTreeMap<&str, (BTreeMap<&str, usize>, Option<&str>)> = BTreeMap::new();
    for t in tweets {
        let entry = tally.entry(&t.author.user_id).or_default();
        *entry
            .0
            .entry(t.lang.as_deref().unwrap_or("und"))
            .or_default() += 1;
        if entry.1.is_none() {
            entry.1 = t.author.declared_language.as_deref();
        }
    }
    tally
        .into_iter()
        .map(|(user, (langs, declared))| {
            let top = langs.values().copied().max().unwrap_or(0);
            let tied: Vec<&str> = langs
                .iter()
                .filter(|(_, &n)| n == top)
                .map(|(l, _)| *l)
                .collect();
            let lang = match tied.as_slice() {
                [only] => only,
                _ => declared.filter(|d| tied.contains(d)).unwrap_or("und"),
            };
            (user.to_string(), lang.to_string())
        })
        .collect()
}

/// Share of accounts using each language. Empty input gives an empty map.
pub fn language_profile(tweets: &[TweetRecord]) -> BTreeMap<String, f64> {
    let langs = account_languages(tweets);
    let n = langs.len() as f64;
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for lang in langs.into_values() {
        *out.entry(lang).or_default() += 1.0;
    }
    out.values_mut().for_each(|v| *v /= n);
    out
}

/// Builds a sample from tweets and the English overall raw score of each
/// author's report.
pub fn build_sample(
    group_name: &str,
    tweets: &[TweetRecord],
    scores: &HashMap<String, ScoreReport>,
    language: Option<&str>,
) -> Result<AnalyticalSample> {
    let raw: HashMap<String, f64> = scores
        .iter()
        .map(|(k, r)| (k.clone(), r.raw_overall()))
        .collect();
    build_sample_from_scores(group_name, tweets, &raw, language)
}

/// Like [`build_sample`] with bare raw scores.
pub fn build_sample_from_scores(
    group_name: &str,
    tweets: &[TweetRecord],
    scores: &HashMap<String, f64>,
    language: Option<&str>,
) -> Result<AnalyticalSample> {
    let mut accounts = BTreeMap::new();
    for t in tweets {
        let id = &t.author.user_id;
        let score = *scores
            .get(id)
            .ok_or_else(|| Error::MissingScore(id.clone()))?;
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::OutOfRange(format!("score {score} for {id}")));
        }
        accounts.insert(id.clone(), score);
    }
    let raw_accounts = accounts.len();
    if let Some(lang) = language {
        let langs = account_languages(tweets);
        accounts.retain(|id, _| langs[id] == lang);
    }
    let kept = tweets
        .iter()
        .filter_map(|t| {
            accounts.get(&t.author.user_id).map(|&score| SampleTweet {
                tweet_id: t.tweet_id.clone(),
                user_id: t.author.user_id.clone(),
                score,
            })
        })
        .collect();
    Ok(AnalyticalSample {
        group_name: group_name.to_string(),
        tweets: kept,
        accounts,
        language_filter: language.map(str::to_string),
        raw_tweets: tweets.len(),
        raw_accounts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupProportion {
    pub group: String,
    pub above: u64,
    pub total: u64,
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub group_a: String,
    pub group_b: String,
    pub test: TestResult,
    pub stars: Stars,
}

impl Comparison {
    fn new(group_a: &str, group_b: &str, test: TestResult) -> Self {
        Comparison {
            group_a: group_a.to_string(),
            group_b: group_b.to_string(),
            stars: test.stars(),
            test,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub threshold: f64,
    pub unit: Unit,
    pub groups: Vec<GroupProportion>,
    /// Every pair of non-empty groups, in input order.
    pub comparisons: Vec<Comparison>,
}

/// Share of each group scoring strictly above each threshold, with pairwise
/// two-proportion z-tests.
pub fn threshold_sweep(
    samples: &[AnalyticalSample],
    thresholds: &[f64],
    unit: Unit,
) -> Result<Vec<ThresholdReport>> {
    if let Some(t) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::OutOfRange(format!("threshold {t} outside [0, 1]")));
    }
    let scores: Vec<Vec<f64>> = samples.iter().map(|s| s.scores(unit)).collect();
    thresholds
        .iter()
        .map(|&threshold| {
            let groups: Vec<GroupProportion> = samples
                .iter()
                .zip(&scores)
                .map(|(s, v)| {
                    let above = v.iter().filter(|&&x| x > threshold).count() as u64;
                    let total = v.len() as u64;
                    GroupProportion {
                        group: s.group_name.clone(),
                        above,
                        total,
                        proportion: if total == 0 {
                            0.0
                        } else {
                            above as f64 / total as f64
                        },
                    }
                })
                .collect();
            let mut comparisons = Vec::new();
            for (i, a) in groups.iter().enumerate() {
                for b in &groups[i + 1..] {
                    if a.total > 0 && b.total > 0 {
                        let test = two_proportion_z(a.above, a.total, b.above, b.total)?;
                        comparisons.push(Comparison::new(&a.group, &b.group, test));
                    }
                }
            }
            Ok(ThresholdReport {
                threshold,
                unit,
                groups,
                comparisons,
            })
        })
        .collect()
}

/// Pairwise Mann-Whitney U tests on the score distributions.
pub fn distribution_tests(samples: &[AnalyticalSample], unit: Unit) -> Result<Vec<Comparison>> {
    let mut out = Vec::new();
    for (i, a) in samples.iter().enumerate() {
        for b in &samples[i + 1..] {
            let (sa, sb) = (a.scores(unit), b.scores(unit));
            if !sa.is_empty() && !sb.is_empty() {
                out.push(Comparison::new(
                    &a.group_name,
                    &b.group_name,
                    mann_whitney_u(&sa, &sb)?,
                ));
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationRow {
    pub threshold: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// No account was predicted bot, so precision and F1 are reported as 0.
    pub degenerate: bool,
    pub confusion: Confusion,
}

/// Classification metrics at each threshold, bot being the positive class.
pub fn threshold_validation(
    labeled: &[(f64, Label)],
    thresholds: &[f64],
) -> Result<Vec<ValidationRow>> {
    let bots = labeled.iter().filter(|(_, l)| l.is_bot()).count();
    let humans = labeled.len() - bots;
    if bots == 0 || humans == 0 {
        return Err(Error::InsufficientLabels {
            min: 1,
            bots,
            humans,
        });
    }
    let (scores, labels): (Vec<f64>, Vec<Label>) = labeled.iter().copied().unzip();
    Ok(thresholds
        .iter()
        .map(|&threshold| {
            let c = Confusion::at(&scores, &labels, threshold);
            let degenerate = c.tp + c.fp == 0;
            let precision = if degenerate {
                0.0
            } else {
                c.tp as f64 / (c.tp + c.fp) as f64
            };
            let recall = c.tp as f64 / (c.tp + c.fn_) as f64;
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ValidationRow {
                threshold,
                accuracy: c.accuracy(),
                precision,
                recall,
                f1,
                degenerate,
                confusion: c,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub probe_time: DateTime<Utc>,
    pub raw_score: f64,
    pub model_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSeries {
    pub user_id: String,
    pub points: Vec<SeriesPoint>,
}

impl ScoreSeries {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SeriesLine {
    user_id: String,
    #[serde(flatten)]
    point: SeriesPoint,
}

/// Per-account score histories, optionally backed by a JSON-lines file that
/// every new point is appended to.
#[derive(Debug, Default)]
pub struct SeriesStore {
    path: Option<PathBuf>,
    series: BTreeMap<String, ScoreSeries>,
}

impl SeriesStore {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Opens (or starts) a store at `path`, replaying any existing points.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut store = SeriesStore {
            path: None,
            series: BTreeMap::new(),
        };
        if path.exists() {
            for line in read_jsonl::<SeriesLine>(&path)? {
                let p = line.point;
                store.record_probe(&line.user_id, p.probe_time, p.raw_score, &p.model_version)?;
            }
        }
        store.path = Some(path);
        Ok(store)
    }

    pub fn get(&self, user_id: &str) -> Option<&ScoreSeries> {
        self.series.get(user_id)
    }

    pub fn users(&self) -> impl Iterator<Item = &str> {
        self.series.keys().map(String::as_str)
    }

    /// Appends a point. Re-recording the latest point unchanged is a no-op;
    /// any other point must be strictly later than the latest.
    pub fn record_probe(
        &mut self,
        user_id: &str,
        probe_time: DateTime<Utc>,
        raw_score: f64,
        model_version: &str,
    ) -> Result<&ScoreSeries> {
        if !(0.0..=1.0).contains(&raw_score) {
            return Err(Error::OutOfRange(format!("raw score {raw_score}")));
        }
        let point = SeriesPoint {
            probe_time,
            raw_score,
            model_version: model_version.to_string(),
        };
        let series = self
            .series
            .entry(user_id.to_string())
            .or_insert_with(|| ScoreSeries {
                user_id: user_id.to_string(),
                points: Vec::new(),
            });
        if let Some(last) = series.points.last() {
            if *last == point {
                return Ok(series);
            }
            if probe_time <= last.probe_time {
                return Err(Error::Invalid(format!(
                    "probe at {probe_time} for {user_id} is not after {}",
                    last.probe_time
                )));
            }
        }
        if let Some(path) = &self.path {
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(file);
            let line = SeriesLine {
                user_id: user_id.to_string(),
                point: point.clone(),
            };
            serde_json::to_writer(&mut w, &line).map_err(|e| Error::Invalid(e.to_string()))?;
            w.write_all(b"\n")
                .and_then(|_| w.flush())
                .map_err(|e| Error::io(path, e))?;
        }
        series.points.push(point);
        Ok(series)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

/// Box-plot summary; quartiles interpolate linearly between order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let h = p * (v.len() - 1) as f64;
            let lo = h.floor() as usize;
            let hi = h.ceil() as usize;
            v[lo] + (h - lo as f64) * (v[hi] - v[lo])
        };
        Some(Summary {
            min: v[0],
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
            n: v.len(),
        })
    }
}

/// `bins` equal-width bins over [0, 1]; the last bin includes 1.
pub fn histogram(values: &[f64], bins: usize) -> Vec<Bin> {
    let bins = bins.max(1);
    let mut counts = vec![0u64; bins];
    for &x in values {
        let i = ((x * bins as f64).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| Bin {
            lo: i as f64 / bins as f64,
            hi: (i + 1) as f64 / bins as f64,
            count,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDistribution {
    pub group: String,
    pub histogram: Vec<Bin>,
    pub summary: Option<Summary>,
}

/// Everything an external plotting tool needs for the distribution figures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub unit: Unit,
    pub groups: Vec<GroupDistribution>,
    pub annotations: Vec<Comparison>,
}

pub fn plot_data(samples: &[AnalyticalSample], bins: usize, unit: Unit) -> Result<PlotData> {
    Ok(PlotData {
        unit,
        groups: samples
            .iter()
            .map(|s| {
                let v = s.scores(unit);
                GroupDistribution {
                    group: s.group_name.clone(),
                    histogram: histogram(&v, bins),
                    summary: Summary::of(&v),
                }
            })
            .collect(),
        annotations: distribution_tests(samples, unit)?,
    })
}

/// Flat CSV of threshold reports, one row per group pair.
pub fn sweep_csv(reports: &[ThresholdReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Invalid(e.to_string());
    w.write_record([
        "threshold",
        "unit",
        "group_a",
        "group_b",
        "prop_a",
        "prop_b",
        "z",
        "p_value",
        "stars",
    ])
    .map_err(csv_err)?;
    for r in reports {
        let prop = |g: &str| {
            r.groups
                .iter()
                .find(|x| x.group == g)
                .map_or(0.0, |x| x.proportion)
        };
        for c in &r.comparisons {
            w.write_record([
                r.threshold.to_string(),
                format!("{:?}", r.unit).to_lowercase(),
                c.group_a.clone(),
                c.group_b.clone(),
                prop(&c.group_a).to_string(),
                prop(&c.group_b).to_string(),
                c.test.statistic.to_string(),
                c.test.p_value.to_string(),
                c.stars.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `samples` as JSON-lines, one sample per line.
pub fn write_samples(path: &Path, samples: &[AnalyticalSample]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in samples {
        serde_json::to_writer(&mut w, s).map_err(|e| Error::Invalid(e.to_string()))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
