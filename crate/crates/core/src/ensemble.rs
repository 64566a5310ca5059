//! Ensemble of specialized classifiers.
//!
//! One forest per bot class is trained on that class's bots against the
//! pooled humans, and a second set is trained on the language-independent
//! projection of the registry. An account's overall score is the maximum over
//! the class scores of a family; the per-class scores are always reported.
//!
//! Calibration turns a raw score `s` into the posterior probability that an
//! account scoring `s` or more is a bot:
//!
//! ```text
//! CAP(s) = π·S_b(s) / (π·S_b(s) + (1 − π)·S_h(s))
//! ```
//!
//! where `S_b`, `S_h` are the empirical survival functions of bot and human
//! scores on a labeled calibration set and `π` is the assumed bot prevalence.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AccountPayload, BotClass, Label, LabeledDataset, LabeledRecord};
use crate::error::{Error, Result};
use crate::features::{extract_full, FeatureRegistry, FeatureVector};
use crate::forest::{self, ForestModel, ForestParams};

pub const ESC_FORMAT: &str = "botscope-esc/1";
pub const CALIBRATION_FORMAT: &str = "botscope-cap/1";

/// Minimum number of bots per class for a specialized forest.
pub const MIN_CLASS_EXAMPLES: usize = 10;

/// Bot prevalence assumed when no prior is configured.
pub const DEFAULT_PRIOR: f64 = 0.15;

/// Display scores are raw scores on a 0-5 scale.
pub const DISPLAY_SCALE: f64 = 5.0;

pub fn display_score(raw: f64) -> f64 {
    DISPLAY_SCALE * raw
}

/// 64-bit FNV-1a, used to derive content-addressed version strings.
pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EscModel {
    pub format: String,
    pub model_version: String,
    pub registry: FeatureRegistry,
    pub universal_registry: FeatureRegistry,
    pub class_list: Vec<BotClass>,
    pub specialized: BTreeMap<BotClass, ForestModel>,
    pub universal_specialized: BTreeMap<BotClass, ForestModel>,
}

fn class_seed(seed: u64, class: BotClass, universal: bool) -> u64 {
    let tag = class as u64 * 2 + u64::from(universal) + 1;
    seed ^ tag.wrapping_mul(0xD1B5_4A32_D192_ED03)
}

/// Full feature vectors for `records`, in order.
pub fn extract_records(
    records: &[&LabeledRecord],
    registry: &FeatureRegistry,
) -> Result<Vec<FeatureVector>> {
    records
        .par_iter()
        .map(|r| extract_full(&r.payload, registry))
        .collect()
}

/// Trains the english and universal forest families.
pub fn train_esc(
    datasets: &[LabeledDataset],
    registry: &FeatureRegistry,
    params: &ForestParams,
    seed: u64,
) -> Result<EscModel> {
    registry.validate()?;
    let records: Vec<&LabeledRecord> = datasets.iter().flat_map(|d| d.records()).collect();
    let vectors = extract_records(&records, registry)?;
    let universal_registry = registry.universal();
    let universal_columns = registry.columns_of(&universal_registry)?;

    let humans: Vec<usize> = (0..records.len())
        .filter(|&i| records[i].label == Label::Human)
        .collect();
    let mut by_class: BTreeMap<BotClass, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        if let Some(class) = r.effective_class() {
            by_class.entry(class).or_default().push(i);
        }
    }
    if humans.len() < forest::MIN_PER_LABEL || by_class.is_empty() {
        return Err(Error::InsufficientLabels {
            min: forest::MIN_PER_LABEL,
            bots: records.len() - humans.len(),
            humans: humans.len(),
        });
    }
    for (class, idx) in &by_class {
        if idx.len() < MIN_CLASS_EXAMPLES {
            return Err(Error::SmallClass {
                class: class.to_string(),
                count: idx.len(),
                min: MIN_CLASS_EXAMPLES,
            });
        }
    }

    let mut specialized = BTreeMap::new();
    let mut universal_specialized = BTreeMap::new();
    for (&class, bots) in &by_class {
        let rows = || bots.iter().chain(&humans).map(|&i| (i, records[i].label));
        let english: Vec<(FeatureVector, Label)> =
            rows().map(|(i, l)| (vectors[i].clone(), l)).collect();
        let universal: Vec<(FeatureVector, Label)> = rows()
            .map(|(i, l)| {
                (
                    vectors[i].project(&universal_columns, &universal_registry.version),
                    l,
                )
            })
            .collect();
        specialized.insert(
            class,
            forest::train(&english, params, class_seed(seed, class, false))?,
        );
        universal_specialized.insert(
            class,
            forest::train(&universal, params, class_seed(seed, class, true))?,
        );
    }

    let mut model = EscModel {
        format: ESC_FORMAT.to_string(),
        model_version: String::new(),
        registry: registry.clone(),
        universal_registry,
        class_list: by_class.keys().copied().collect(),
        specialized,
        universal_specialized,
    };
    model.model_version = format!("esc-{:016x}", fnv1a(model.to_json().as_bytes()));
    Ok(model)
}

/// A single forest on all bots against all humans, the baseline the ensemble
/// is compared with.
pub fn train_pooled(
    datasets: &[LabeledDataset],
    registry: &FeatureRegistry,
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel> {
    let records: Vec<&LabeledRecord> = datasets.iter().flat_map(|d| d.records()).collect();
    let vectors = extract_records(&records, registry)?;
    let rows: Vec<(FeatureVector, Label)> = vectors
        .into_iter()
        .zip(records.iter().map(|r| r.label))
        .collect();
    forest::train(&rows, params, seed)
}

/// Fraction of `scores` inside the closed band `[lo, hi]`.
pub fn band_mass(scores: &[f64], lo: f64, hi: f64) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    scores.iter().filter(|s| (lo..=hi).contains(*s)).count() as f64 / scores.len() as f64
}

/// One score family: the overall score plus one score per bot class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreFamily {
    pub overall: f64,
    #[serde(flatten)]
    pub classes: BTreeMap<BotClass, f64>,
}

impl ScoreFamily {
    fn from_classes(classes: BTreeMap<BotClass, f64>) -> Self {
        let overall = classes.values().copied().fold(0.0, f64::max);
        ScoreFamily { overall, classes }
    }

    fn rescaled(&self) -> Self {
        ScoreFamily {
            overall: display_score(self.overall),
            classes: self
                .classes
                .iter()
                .map(|(&c, &v)| (c, display_score(v)))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSet {
    pub english: ScoreFamily,
    pub universal: ScoreFamily,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CapScores {
    pub english: Option<f64>,
    pub universal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportUser {
    pub user_id: String,
    pub screen_name: String,
}

/// Scores for one account at one probe time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub user: ReportUser,
    pub probe_time: DateTime<Utc>,
    pub raw_scores: ScoreSet,
    pub display_scores: ScoreSet,
    pub cap: CapScores,
    /// Set when the payload had neither timeline tweets nor mentions.
    pub low_data: bool,
    pub model_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration_version: Option<String>,
}

impl ScoreReport {
    pub fn user_id(&self) -> &str {
        &self.user.user_id
    }

    pub fn raw_overall(&self) -> f64 {
        self.raw_scores.english.overall
    }

    pub fn raw_universal(&self) -> f64 {
        self.raw_scores.universal.overall
    }

    pub fn display_overall(&self) -> f64 {
        self.display_scores.english.overall
    }

    pub fn display_universal(&self) -> f64 {
        self.display_scores.universal.overall
    }

    /// Fills the CAP fields from a calibration pair.
    pub fn calibrate(mut self, calibration: &Calibration) -> Result<Self> {
        self.cap = CapScores {
            english: Some(cap_lookup(&calibration.english, self.raw_overall())?),
            universal: Some(cap_lookup(&calibration.universal, self.raw_universal())?),
        };
        self.calibration_version = Some(calibration.version.clone());
        Ok(self)
    }

    /// Checks the report's internal identities.
    pub fn check(&self) -> Result<()> {
        for (raw, display) in [
            (&self.raw_scores.english, &self.display_scores.english),
            (&self.raw_scores.universal, &self.display_scores.universal),
        ] {
            let max = raw.classes.values().copied().fold(0.0, f64::max);
            if raw.overall != max {
                return Err(Error::Invalid(
                    "overall score is not the maximum class score".into(),
                ));
            }
            if display != &raw.rescaled() {
                return Err(Error::Invalid("display scores are not 5 x raw".into()));
            }
            if !raw
                .classes
                .values()
                .chain([&raw.overall])
                .all(|v| (0.0..=1.0).contains(v))
            {
                return Err(Error::OutOfRange("raw score outside [0, 1]".into()));
            }
        }
        Ok(())
    }
}

impl EscModel {
    pub fn validate(&self) -> Result<()> {
        if self.format != ESC_FORMAT {
            return Err(Error::VersionMismatch {
                expected: ESC_FORMAT.into(),
                found: self.format.clone(),
            });
        }
        self.registry.validate()?;
        if self
            .universal_registry
            .features
            .iter()
            .any(|f| f.language_dependent)
        {
            return Err(Error::Invalid(
                "universal registry holds language-dependent features".into(),
            ));
        }
        for class in &self.class_list {
            let (Some(en), Some(un)) = (
                self.specialized.get(class),
                self.universal_specialized.get(class),
            ) else {
                return Err(Error::Invalid(format!("missing forest for class {class}")));
            };
            en.validate()?;
            un.validate()?;
            self.registry.check_version(&en.registry_version)?;
            self.universal_registry
                .check_version(&un.registry_version)?;
        }
        Ok(())
    }

    /// Scores one account. Pure in `(model, payload)`.
    pub fn score_account(&self, payload: &AccountPayload) -> Result<ScoreReport> {
        payload.validate()?;
        let full = extract_full(payload, &self.registry)?;
        let columns = self.registry.columns_of(&self.universal_registry)?;
        let universal = full.project(&columns, &self.universal_registry.version);
        let mut english_classes = BTreeMap::new();
        let mut universal_classes = BTreeMap::new();
        for class in &self.class_list {
            english_classes.insert(*class, self.specialized[class].score(&full)?);
            universal_classes.insert(*class, self.universal_specialized[class].score(&universal)?);
        }
        let raw = ScoreSet {
            english: ScoreFamily::from_classes(english_classes),
            universal: ScoreFamily::from_classes(universal_classes),
        };
        let display = ScoreSet {
            english: raw.english.rescaled(),
            universal: raw.universal.rescaled(),
        };
        let report = ScoreReport {
            user: ReportUser {
                user_id: payload.user.user_id.clone(),
                screen_name: payload.user.screen_name.clone(),
            },
            probe_time: payload.probe_time,
            raw_scores: raw,
            display_scores: display,
            cap: CapScores::default(),
            low_data: payload.timeline.is_empty() && payload.mentions.is_empty(),
            model_version: self.model_version.clone(),
            calibration_version: None,
        };
        debug_assert!(report.check().is_ok());
        Ok(report)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: EscModel = serde_json::from_str(s).map_err(|e| Error::Parse {
            file: "<esc model>".into(),
            line: e.line(),
            message: e.to_string(),
        })?;
        model.validate()?;
        Ok(model)
    }
}

/// Threshold grid `{0.00, 0.01, ..., 1.00}`.
pub fn cap_grid() -> Vec<f64> {
    (0..=100).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub thresholds: Vec<f64>,
    /// `S_b(s) = P(score ≥ s | bot)`.
    pub bot_survival: Vec<f64>,
    /// `S_h(s) = P(score ≥ s | human)`.
    pub human_survival: Vec<f64>,
    pub prior: f64,
}

impl CalibrationTable {
    pub fn validate(&self) -> Result<()> {
        let n = self.thresholds.len();
        if n == 0 || self.bot_survival.len() != n || self.human_survival.len() != n {
            return Err(Error::Invalid(
                "calibration table columns differ in length".into(),
            ));
        }
        if !(self.prior > 0.0 && self.prior < 1.0) {
            return Err(Error::OutOfRange(format!(
                "prior {} not in (0, 1)",
                self.prior
            )));
        }
        if self.thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("thresholds are not ascending".into()));
        }
        for s in [&self.bot_survival, &self.human_survival] {
            if s[0] != 1.0 && self.thresholds[0] <= 0.0 {
                return Err(Error::Invalid("survival at 0 must be 1".into()));
            }
            if s.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::OutOfRange("survival value outside [0, 1]".into()));
            }
            if s.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::Invalid("survival function increases".into()));
            }
        }
        Ok(())
    }

    /// Posterior at grid index `i`, if defined.
    fn posterior_at(&self, i: usize) -> Option<f64> {
        let b = self.prior * self.bot_survival[i];
        let h = (1.0 - self.prior) * self.human_survival[i];
        (b + h > 0.0).then(|| b / (b + h))
    }

    pub fn cap_curve(&self) -> Vec<(f64, Option<f64>)> {
        (0..self.thresholds.len())
            .map(|i| (self.thresholds[i], self.posterior_at(i)))
            .collect()
    }
}

fn survival(scores: &[f64], grid: &[f64]) -> Vec<f64> {
    let n = scores.len() as f64;
    grid.iter()
        .map(|&s| scores.iter().filter(|&&x| x >= s).count() as f64 / n)
        .collect()
}

/// Builds a CAP table from labeled raw scores.
pub fn calibrate(labeled_scores: &[(f64, Label)], prior: f64) -> Result<CalibrationTable> {
    if !(prior > 0.0 && prior < 1.0) {
        return Err(Error::OutOfRange(format!("prior {prior} not in (0, 1)")));
    }
    let (bots, humans): (Vec<_>, Vec<_>) = labeled_scores.iter().partition(|(_, l)| l.is_bot());
    if bots.is_empty() || humans.is_empty() {
        return Err(Error::InsufficientLabels {
            min: 1,
            bots: bots.len(),
            humans: humans.len(),
        });
    }
    if let Some((s, _)) = labeled_scores
        .iter()
        .find(|(s, _)| !(0.0..=1.0).contains(s))
    {
        return Err(Error::OutOfRange(format!("score {s} outside [0, 1]")));
    }
    let bots: Vec<f64> = bots.into_iter().map(|(s, _)| s).collect();
    let humans: Vec<f64> = humans.into_iter().map(|(s, _)| s).collect();
    let thresholds = cap_grid();
    let table = CalibrationTable {
        bot_survival: survival(&bots, &thresholds),
        human_survival: survival(&humans, &thresholds),
        thresholds,
        prior,
    };
    table.validate()?;
    Ok(table)
}

/// CAP at the largest grid threshold not above `raw_score`. Where no
/// calibration account reaches that threshold the nearest lower defined
/// value is returned.
pub fn cap_lookup(table: &CalibrationTable, raw_score: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&raw_score) {
        return Err(Error::OutOfRange(format!(
            "raw score {raw_score} outside [0, 1]"
        )));
    }
    let idx = table.thresholds.partition_point(|&t| t <= raw_score);
    (0..idx)
        .rev()
        .find_map(|i| table.posterior_at(i))
        .ok_or_else(|| Error::Invalid("calibration table has no defined posterior".into()))
}

/// English and universal CAP tables for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub format: String,
    pub version: String,
    pub model_version: String,
    pub english: CalibrationTable,
    pub universal: CalibrationTable,
}

impl Calibration {
    /// Scores every record of `datasets` with `model` and calibrates both
    /// score families.
    pub fn fit(model: &EscModel, datasets: &[LabeledDataset], prior: f64) -> Result<Self> {
        let records: Vec<&LabeledRecord> = datasets.iter().flat_map(|d| d.records()).collect();
        let reports = records
            .par_iter()
            .map(|r| model.score_account(&r.payload))
            .collect::<Result<Vec<_>>>()?;
        let english: Vec<(f64, Label)> = reports
            .iter()
            .zip(&records)
            .map(|(s, r)| (s.raw_overall(), r.label))
            .collect();
        let universal: Vec<(f64, Label)> = reports
            .iter()
            .zip(&records)
            .map(|(s, r)| (s.raw_universal(), r.label))
            .collect();
        Self::from_tables(
            model,
            calibrate(&english, prior)?,
            calibrate(&universal, prior)?,
        )
    }

    pub fn from_tables(
        model: &EscModel,
        english: CalibrationTable,
        universal: CalibrationTable,
    ) -> Result<Self> {
        english.validate()?;
        universal.validate()?;
        let mut cal = Calibration {
            format: CALIBRATION_FORMAT.to_string(),
            version: String::new(),
            model_version: model.model_version.clone(),
            english,
            universal,
        };
        cal.version = format!("cap-{:016x}", fnv1a(cal.to_json().as_bytes()));
        Ok(cal)
    }

    /// The same survival tables under a different bot prevalence. The result
    /// gets its own version.
    pub fn with_prior(&self, prior: f64) -> Result<Self> {
        let mut english = self.english.clone();
        let mut universal = self.universal.clone();
        english.prior = prior;
        universal.prior = prior;
        english.validate()?;
        universal.validate()?;
        let mut cal = Calibration {
            version: String::new(),
            english,
            universal,
            ..self.clone()
        };
        cal.version = format!("cap-{:016x}", fnv1a(cal.to_json().as_bytes()));
        Ok(cal)
    }

    pub fn check_model(&self, model: &EscModel) -> Result<()> {
        if self.model_version != model.model_version {
            return Err(Error::VersionMismatch {
                expected: model.model_version.clone(),
                found: self.model_version.clone(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("calibration serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cal: Calibration = serde_json::from_str(s).map_err(|e| Error::Parse {
            file: "<calibration>".into(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if cal.format != CALIBRATION_FORMAT {
            return Err(Error::VersionMismatch {
                expected: CALIBRATION_FORMAT.into(),
                found: cal.format,
            });
        }
        cal.english.validate()?;
        cal.universal.validate()?;
        Ok(cal)
    }
}
