use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{train, ForestParams};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

/// Area under the ROC curve: probability that a random positive outscores a
/// random negative, ties counting one half. Computed from midrank sums.
pub fn auc(scores_pos: &[f64], scores_neg: &[f64]) -> Result<f64> {
    if scores_pos.is_empty() || scores_neg.is_empty() {
        return Err(Error::Invalid(
            "auc needs at least one positive and one negative score".into(),
        ));
    }
    let ranks = crate::stats::midranks(scores_pos.iter().chain(scores_neg).copied());
    let np = scores_pos.len() as f64;
    let nn = scores_neg.len() as f64;
    let rank_sum: f64 = ranks[..scores_pos.len()].iter().sum();
    let u = rank_sum - np * (np + 1.0) / 2.0;
    Ok(u / (np * nn))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    /// Counts with `score > threshold` predicted bot.
    pub fn at(scores: &[f64], labels: &[Label], threshold: f64) -> Self {
        let mut c = Confusion::default();
        for (&s, &l) in scores.iter().zip(labels) {
            match (s > threshold, l.is_bot()) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn accuracy(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            (self.tp + self.tn) as f64 / self.total() as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// AUC over all pooled out-of-fold scores.
    pub auc: f64,
    pub per_fold_auc: Vec<f64>,
    pub n_folds: usize,
    pub threshold: f64,
    pub confusion: Confusion,
}

impl EvalReport {
    pub fn accuracy(&self) -> f64 {
        self.confusion.accuracy()
    }
}

/// Stratified fold index for each example: each label's indices are shuffled
/// with `seed`, then dealt round-robin, humans continuing where bots stopped.
fn assign_folds(labels: &[Label], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut next = 0;
    for label in [Label::Bot, Label::Human] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            folds[i] = next % k;
            next += 1;
        }
    }
    folds
}

fn fold_seed(seed: u64, fold: usize) -> u64 {
    seed ^ (fold as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Out-of-fold score for every example and the fold it was held out in.
pub fn out_of_fold_scores(
    data: &[(FeatureVector, Label)],
    params: &ForestParams,
    k: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<usize>)> {
    if k < 2 {
        return Err(Error::Invalid(format!("need at least 2 folds, got {k}")));
    }
    if data.len() < k {
        return Err(Error::Invalid(format!(
            "{} examples cannot fill {k} folds",
            data.len()
        )));
    }
    let labels: Vec<Label> = data.iter().map(|(_, l)| *l).collect();
    let folds = assign_folds(&labels, k, seed);
    for fold in 0..k {
        let has = |want: Label| (0..data.len()).any(|i| folds[i] == fold && labels[i] == want);
        if !has(Label::Bot) || !has(Label::Human) {
            return Err(Error::DegenerateFold { fold });
        }
    }
    let mut scores = vec![0.0; data.len()];
    for fold in 0..k {
        let train_set: Vec<(FeatureVector, Label)> = data
            .iter()
            .zip(&folds)
            .filter(|(_, &f)| f != fold)
            .map(|(d, _)| d.clone())
            .collect();
        let model = train(&train_set, params, fold_seed(seed, fold))?;
        for i in (0..data.len()).filter(|&i| folds[i] == fold) {
            scores[i] = model.score(&data[i].0)?;
        }
    }
    Ok((scores, folds))
}

/// k-fold stratified cross-validation.
pub fn cross_validate(
    data: &[(FeatureVector, Label)],
    params: &ForestParams,
    k: usize,
    seed: u64,
) -> Result<EvalReport> {
    let (scores, folds) = out_of_fold_scores(data, params, k, seed)?;
    let labels: Vec<Label> = data.iter().map(|(_, l)| *l).collect();
    let split = |keep: &dyn Fn(usize) -> bool| {
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        for i in (0..data.len()).filter(|&i| keep(i)) {
            if labels[i].is_bot() {
                pos.push(scores[i]);
            } else {
                neg.push(scores[i]);
            }
        }
        (pos, neg)
    };
    let (pos, neg) = split(&|_| true);
    let overall = auc(&pos, &neg)?;
    let per_fold_auc = (0..k)
        .map(|fold| {
            let (pos, neg) = split(&|i| folds[i] == fold);
            auc(&pos, &neg)
        })
        .collect::<Result<Vec<_>>>()?;
    let threshold = 0.5;
    Ok(EvalReport {
        auc: overall,
        per_fold_auc,
        n_folds: k,
        threshold,
        confusion: Confusion::at(&scores, &labels, threshold),
    })
}
