//! Metadata-only classifier and training-set selection.
//!
//! A [`LiteModel`] scores a bare user object at a probe time, so it can run on
//! the user objects embedded in tweets, including archived ones. Which labeled
//! datasets to train it on is decided by exhaustively evaluating every
//! non-empty subset of the candidates on three criteria: cross-validated
//! accuracy, AUC on a held-out dataset, and rank agreement with a reference
//! ensemble on the held-out accounts.

use std::collections::HashSet;
use std::fmt::Write as _;

use chrono::{DateTime, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Label, LabeledDataset, LabeledRecord, UserObject};
use crate::ensemble::{fnv1a, EscModel};
use crate::error::{Error, Result};
use crate::features::{extract_lite, FeatureRegistry, FeatureVector};
use crate::forest::{self, auc, ForestModel, ForestParams};
use crate::stats::spearman;

pub const LITE_FORMAT: &str = "botscope-lite/1";

/// Largest candidate list the exhaustive search accepts.
pub const MAX_CANDIDATES: usize = 12;

const CV_FOLDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionMetrics {
    pub cv_accuracy: f64,
    pub holdout_auc: f64,
    /// Spearman correlation between lite scores and the reference overall
    /// scores on the holdout accounts.
    pub consistency: f64,
}

/// Weights for (cv_accuracy, holdout_auc, consistency).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionWeights(pub [f64; 3]);

impl Default for SelectionWeights {
    fn default() -> Self {
        SelectionWeights([1.0, 1.0, 1.0])
    }
}

impl SelectionWeights {
    pub fn combine(&self, m: &SelectionMetrics) -> f64 {
        let [a, b, c] = self.0;
        a * m.cv_accuracy + b * m.holdout_auc + c * m.consistency
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetRow {
    /// Bit `i` set means candidate `i` is included.
    pub mask: u32,
    pub datasets: Vec<String>,
    /// `None` when the subset cannot be trained or cross-validated.
    pub metrics: Option<SelectionMetrics>,
    pub weighted: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl SubsetRow {
    pub fn contains(&self, candidate: usize) -> bool {
        self.mask & (1 << candidate) != 0
    }

    fn indices(&self) -> Vec<u32> {
        (0..32).filter(|i| self.mask & (1 << i) != 0).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteModel {
    pub format: String,
    pub model_version: String,
    pub registry: FeatureRegistry,
    pub forest: ForestModel,
    pub selected_datasets: Vec<String>,
    #[serde(default)]
    pub selection_report: Vec<SubsetRow>,
}

fn lite_rows(
    records: &[&LabeledRecord],
    registry: &FeatureRegistry,
) -> Result<Vec<(FeatureVector, Label)>> {
    records
        .par_iter()
        .map(|r| {
            Ok((
                extract_lite(&r.payload.user, r.payload.probe_time, registry)?,
                r.label,
            ))
        })
        .collect()
}

impl LiteModel {
    fn assemble(
        registry: FeatureRegistry,
        forest: ForestModel,
        selected: Vec<String>,
        report: Vec<SubsetRow>,
    ) -> Self {
        let mut model = LiteModel {
            format: LITE_FORMAT.to_string(),
            model_version: String::new(),
            registry,
            forest,
            selected_datasets: selected,
            selection_report: report,
        };
        model.model_version = format!("lite-{:016x}", fnv1a(model.to_json().as_bytes()));
        model
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != LITE_FORMAT {
            return Err(Error::VersionMismatch {
                expected: LITE_FORMAT.into(),
                found: self.format.clone(),
            });
        }
        self.registry.validate()?;
        if self.registry.features.iter().any(|f| !f.lite_eligible) {
            return Err(Error::Invalid(
                "lite registry holds non-metadata features".into(),
            ));
        }
        self.registry.check_version(&self.forest.registry_version)?;
        self.forest.validate()
    }

    /// Bot score from metadata alone.
    pub fn score(&self, user: &UserObject, probe_time: DateTime<Utc>) -> Result<f64> {
        user.validate()?;
        let x = extract_lite(user, probe_time, &self.registry)?;
        self.forest.score(&x)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("lite model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: LiteModel = serde_json::from_str(s).map_err(|e| Error::Parse {
            file: "<lite model>".into(),
            line: e.line(),
            message: e.to_string(),
        })?;
        model.validate()?;
        Ok(model)
    }

    /// The selection table as CSV.
    pub fn selection_csv(&self) -> String {
        selection_csv(&self.selection_report)
    }
}

pub fn score_lite(model: &LiteModel, user: &UserObject, probe_time: DateTime<Utc>) -> Result<f64> {
    model.score(user, probe_time)
}

/// Trains a lite model on the union of `datasets`.
pub fn train_lite(
    datasets: &[LabeledDataset],
    registry: &FeatureRegistry,
    params: &ForestParams,
    seed: u64,
) -> Result<LiteModel> {
    let lite = registry.lite();
    let records: Vec<&LabeledRecord> = datasets.iter().flat_map(|d| d.records()).collect();
    let rows = lite_rows(&records, &lite)?;
    let forest = forest::train(&rows, params, seed)?;
    let names = datasets.iter().map(|d| d.name().to_string()).collect();
    Ok(LiteModel::assemble(lite, forest, names, Vec::new()))
}

/// Exhaustive search over non-empty subsets of `candidates`; the winner
/// maximizes the weighted metric sum, ties going to fewer datasets and then to
/// the lexicographically smaller index list.
pub fn select_training_sets(
    candidates: &[LabeledDataset],
    holdout: &LabeledDataset,
    reference: &EscModel,
    weights: SelectionWeights,
    registry: &FeatureRegistry,
    params: &ForestParams,
    seed: u64,
) -> Result<LiteModel> {
    if candidates.is_empty() || candidates.len() > MAX_CANDIDATES {
        return Err(Error::OutOfRange(format!(
            "{} candidate datasets; exhaustive search takes 1 to {MAX_CANDIDATES}",
            candidates.len()
        )));
    }
    let holdout_ids: HashSet<&str> = holdout.user_ids().collect();
    for c in candidates {
        if let Some(id) = c.user_ids().find(|id| holdout_ids.contains(id)) {
            return Err(Error::Invalid(format!(
                "candidate {} shares user_id {id} with holdout {}",
                c.name(),
                holdout.name()
            )));
        }
    }
    let (h_bots, h_humans) = holdout.counts();
    if h_bots == 0 || h_humans == 0 {
        return Err(Error::InsufficientLabels {
            min: 1,
            bots: h_bots,
            humans: h_humans,
        });
    }

    let lite = registry.lite();
    let holdout_records: Vec<&LabeledRecord> = holdout.records().iter().collect();
    let holdout_rows = lite_rows(&holdout_records, &lite)?;
    let reference_scores = holdout_records
        .par_iter()
        .map(|r| Ok(reference.score_account(&r.payload)?.raw_overall()))
        .collect::<Result<Vec<f64>>>()?;
    let candidate_rows = candidates
        .iter()
        .map(|c| lite_rows(&c.records().iter().collect::<Vec<_>>(), &lite))
        .collect::<Result<Vec<_>>>()?;

    let n = candidates.len();
    let evaluate = |mask: u32| -> Result<(SubsetRow, Option<ForestModel>)> {
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let datasets = members
            .iter()
            .map(|&i| candidates[i].name().to_string())
            .collect();
        let rows: Vec<(FeatureVector, Label)> = members
            .iter()
            .flat_map(|&i| candidate_rows[i].iter().cloned())
            .collect();
        let bots = rows.iter().filter(|(_, l)| l.is_bot()).count();
        let humans = rows.len() - bots;
        if bots < CV_FOLDS || humans < CV_FOLDS {
            return Ok((
                SubsetRow {
                    mask,
                    datasets,
                    metrics: None,
                    weighted: None,
                    note: Some(format!(
                        "needs {CV_FOLDS} of each label, has {bots} bots and {humans} humans"
                    )),
                },
                None,
            ));
        }
        let cv = forest::cross_validate(&rows, params, CV_FOLDS, seed)?;
        let model = forest::train(&rows, params, seed)?;
        let scores = holdout_rows
            .iter()
            .map(|(x, _)| model.score(x))
            .collect::<Result<Vec<f64>>>()?;
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for (s, (_, l)) in scores.iter().zip(&holdout_rows) {
            if l.is_bot() {
                pos.push(*s)
            } else {
                neg.push(*s)
            }
        }
        let metrics = SelectionMetrics {
            cv_accuracy: cv.accuracy(),
            holdout_auc: auc(&pos, &neg)?,
            consistency: spearman(&scores, &reference_scores)?,
        };
        Ok((
            SubsetRow {
                mask,
                datasets,
                weighted: Some(weights.combine(&metrics)),
                metrics: Some(metrics),
                note: None,
            },
            Some(model),
        ))
    };

    let evaluated = (1u32..(1 << n))
        .into_par_iter()
        .map(evaluate)
        .collect::<Result<Vec<_>>>()?;

    let winner = evaluated
        .iter()
        .filter(|(row, _)| row.weighted.is_some())
        .max_by(|(a, _), (b, _)| {
            a.weighted
                .unwrap()
                .total_cmp(&b.weighted.unwrap())
                .then_with(|| b.mask.count_ones().cmp(&a.mask.count_ones()))
                .then_with(|| b.indices().cmp(&a.indices()))
        })
        .ok_or_else(|| {
            Error::Invalid("no candidate subset has enough examples of both labels".into())
        })?;
    let selected = winner.0.datasets.clone();
    let forest = winner.1.clone().expect("feasible subsets carry a model");
    let report = evaluated.into_iter().map(|(row, _)| row).collect();
    Ok(LiteModel::assemble(lite, forest, selected, report))
}

pub fn selection_csv(rows: &[SubsetRow]) -> String {
    let mut out = String::from("mask,datasets,cv_accuracy,holdout_auc,consistency,weighted\n");
    let fmt = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
    for r in rows {
        let m = r.metrics;
        let _ = writeln!(
            out,
            "{:#b},{},{},{},{},{}",
            r.mask,
            r.datasets.join(";"),
            fmt(m.map(|m| m.cv_accuracy)),
            fmt(m.map(|m| m.holdout_auc)),
            fmt(m.map(|m| m.consistency)),
            fmt(r.weighted),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthesize_corpus, Archetype, CorpusSpec};
    use crate::ensemble::train_esc;
    use crate::features::default_registry;

    fn corpus(name: &str, humans: u32, spammers: u32, seed: u64) -> LabeledDataset {
        let mut spec = CorpusSpec::fixture()
            .with_counts(&[(Archetype::Human, humans), (Archetype::Spammer, spammers)]);
        spec.name = name.into();
        synthesize_corpus(&spec, seed).unwrap()
    }

    /// Same accounts under new ids so datasets can be combined.
    fn renamed(ds: &LabeledDataset, prefix: &str) -> LabeledDataset {
        let records = ds
            .records()
            .iter()
            .map(|r| LabeledRecord {
                payload: r.payload.with_user_id(&format!("{prefix}{}", r.user_id())),
                ..r.clone()
            })
            .collect();
        LabeledDataset::new(format!("{prefix}{}", ds.name()), records).unwrap()
    }

    #[test]
    fn lite_ignores_timeline() {
        let ds = corpus("a", 30, 30, 1);
        let model = train_lite(
            std::slice::from_ref(&ds),
            &default_registry(),
            &ForestParams::default().with_trees(20),
            3,
        )
        .unwrap();
        model.validate().unwrap();
        for r in ds.records().iter().take(10) {
            let mut stripped = r.payload.clone();
            stripped.timeline.clear();
            stripped.mentions.clear();
            let a = model.score(&r.payload.user, r.payload.probe_time).unwrap();
            let b = model.score(&stripped.user, stripped.probe_time).unwrap();
            assert_eq!(a, b);
        }
        assert_eq!(LiteModel::from_json(&model.to_json()).unwrap(), model);
    }

    #[test]
    fn probe_before_creation_rejected() {
        let ds = corpus("a", 20, 20, 1);
        let model = train_lite(
            std::slice::from_ref(&ds),
            &default_registry(),
            &ForestParams::default().with_trees(5),
            3,
        )
        .unwrap();
        let user = &ds.records()[0].payload.user;
        assert!(score_lite(&model, user, user.created_at - chrono::Duration::days(1)).is_err());
    }

    #[test]
    fn single_candidate_is_selected() {
        let reg = default_registry();
        let params = ForestParams::default().with_trees(10);
        let train = corpus("only", 25, 25, 1);
        let holdout = renamed(&corpus("hold", 15, 15, 2), "h");
        let reference = train_esc(std::slice::from_ref(&train), &reg, &params, 1).unwrap();
        let model = select_training_sets(
            std::slice::from_ref(&train),
            &holdout,
            &reference,
            SelectionWeights::default(),
            &reg,
            &params,
            4,
        )
        .unwrap();
        assert_eq!(model.selected_datasets, vec!["only".to_string()]);
        assert_eq!(model.selection_report.len(), 1);
        assert!(model.selection_csv().starts_with("mask,datasets,"));
    }

    #[test]
    fn overlap_and_size_rejected() {
        let reg = default_registry();
        let params = ForestParams::default().with_trees(5);
        let train = corpus("a", 15, 15, 1);
        let reference = train_esc(std::slice::from_ref(&train), &reg, &params, 1).unwrap();
        let err = select_training_sets(
            std::slice::from_ref(&train),
            &train,
            &reference,
            SelectionWeights::default(),
            &reg,
            &params,
            1,
        )
        .unwrap_err();
        assert!(err.to_string().contains("shares user_id"));
        let many: Vec<LabeledDataset> =
            (0..13).map(|i| renamed(&train, &format!("c{i}"))).collect();
        assert!(matches!(
            select_training_sets(
                &many,
                &renamed(&train, "h"),
                &reference,
                SelectionWeights::default(),
                &reg,
                &params,
                1
            ),
            Err(Error::OutOfRange(_))
        ));
        assert!(select_training_sets(
            &[],
            &train,
            &reference,
            SelectionWeights::default(),
            &reg,
            &params,
            1
        )
        .is_err());
    }

    #[test]
    fn single_label_subsets_are_marked_infeasible() {
        let reg = default_registry();
        let params = ForestParams::default().with_trees(8);
        let mixed = corpus("mixed", 20, 20, 1);
        let bots_only = renamed(&corpus("bots", 0, 12, 2), "b");
        let holdout = renamed(&corpus("hold", 10, 10, 3), "h");
        let reference = train_esc(std::slice::from_ref(&mixed), &reg, &params, 1).unwrap();
        let model = select_training_sets(
            &[mixed, bots_only],
            &holdout,
            &reference,
            SelectionWeights::default(),
            &reg,
            &params,
            1,
        )
        .unwrap();
        let lone = model
            .selection_report
            .iter()
            .find(|r| r.mask == 0b10)
            .unwrap();
        assert!(lone.metrics.is_none() && lone.note.is_some());
    }
    fn flipped(ds: &LabeledDataset) -> LabeledDataset {
        let records = ds
            .records()
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.label = if r.label.is_bot() {
                    Label::Human
                } else {
                    Label::Bot
                };
                r.bot_class = None;
                r
            })
            .collect();
        LabeledDataset::new(format!("{}-flipped", ds.name()), records).unwrap()
    }

    #[test]
    fn poisoned_candidate_is_excluded_and_weight_scale_is_irrelevant() {
        let reg = default_registry();
        let params = ForestParams::default().with_trees(15);
        let a = corpus("a", 30, 30, 1);
        let b = renamed(&corpus("b", 30, 30, 2), "b");
        let poison = flipped(&renamed(&corpus("p", 30, 30, 3), "p"));
        let holdout = renamed(&corpus("hold", 25, 25, 4), "h");
        let reference = train_esc(std::slice::from_ref(&a), &reg, &params, 1).unwrap();
        let candidates = [a, b, poison];
        let run = |w: [f64; 3]| {
            select_training_sets(
                &candidates,
                &holdout,
                &reference,
                SelectionWeights(w),
                &reg,
                &params,
                9,
            )
            .unwrap()
        };
        let model = run([1.0, 1.0, 1.0]);
        assert!(model
            .selected_datasets
            .iter()
            .all(|d| !d.ends_with("flipped")));
        let auc_of = |r: &SubsetRow| r.metrics.unwrap().holdout_auc;
        let clean_min = model
            .selection_report
            .iter()
            .filter(|r| !r.contains(2))
            .map(auc_of)
            .fold(f64::INFINITY, f64::min);
        for r in model.selection_report.iter().filter(|r| r.contains(2)) {
            assert!(auc_of(r) < clean_min, "{:?}", r);
        }
        let scaled = run([7.0, 7.0, 7.0]);
        assert_eq!(scaled.selected_datasets, model.selected_datasets);
        assert_eq!(scaled.forest, model.forest);
    }
}
