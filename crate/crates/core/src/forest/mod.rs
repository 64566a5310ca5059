//! Random forest classifier for the bot/human decision.
//!
//! Each tree is grown on a bootstrap sample with Gini-impurity splits over a
//! random feature subset per node. A forest's score is the fraction of trees
//! voting bot. Trees draw from independent ChaCha streams keyed by tree
//! index, so parallel training is bit-identical to sequential training.

mod eval;
mod tree;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureVector;

pub use eval::{auc, cross_validate, out_of_fold_scores, Confusion, EvalReport};
pub use tree::{DecisionTree, Node};

pub const MODEL_FORMAT: &str = "botscope-forest/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    /// `None` means ⌈√d⌉ for `d` features.
    pub features_per_split: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: 12,
            min_leaf: 2,
            features_per_split: None,
        }
    }
}

impl ForestParams {
    pub fn with_trees(mut self, n_trees: usize) -> Self {
        self.n_trees = n_trees;
        self
    }

    fn resolved_mtry(&self, n_features: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (n_features as f64).sqrt().ceil() as usize)
            .clamp(1, n_features.max(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub format: String,
    pub trees: Vec<DecisionTree>,
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub features_per_split: usize,
    pub n_features: usize,
    pub registry_version: String,
    pub training_seed: u64,
}

/// Minimum examples of each label required for training.
pub const MIN_PER_LABEL: usize = 2;

pub fn train(
    data: &[(FeatureVector, Label)],
    params: &ForestParams,
    seed: u64,
) -> Result<ForestModel> {
    let bots = data.iter().filter(|(_, l)| l.is_bot()).count();
    let humans = data.len() - bots;
    if bots < MIN_PER_LABEL || humans < MIN_PER_LABEL {
        return Err(Error::InsufficientLabels {
            min: MIN_PER_LABEL,
            bots,
            humans,
        });
    }
    let registry_version = data[0].0.registry_version.clone();
    let n_features = data[0].0.len();
    for (x, _) in data {
        if x.registry_version != registry_version {
            return Err(Error::VersionMismatch {
                expected: registry_version,
                found: x.registry_version.clone(),
            });
        }
        if x.len() != n_features {
            return Err(Error::Invalid(format!(
                "feature vectors have lengths {} and {}",
                n_features,
                x.len()
            )));
        }
    }
    if params.n_trees == 0 {
        return Err(Error::Invalid("n_trees must be positive".into()));
    }

    let columns: Vec<Vec<f64>> = (0..n_features)
        .map(|j| data.iter().map(|(x, _)| x.values[j]).collect())
        .collect();
    let is_bot: Vec<bool> = data.iter().map(|(_, l)| l.is_bot()).collect();
    let matrix = tree::Matrix {
        columns: &columns,
        is_bot: &is_bot,
    };
    let cfg = tree::TreeConfig {
        max_depth: params.max_depth,
        min_leaf: params.min_leaf.max(1),
        features_per_split: params.resolved_mtry(n_features),
    };
    let n = data.len();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            tree::grow(&matrix, sample, &cfg, &mut rng)
        })
        .collect();

    Ok(ForestModel {
        format: MODEL_FORMAT.to_string(),
        trees,
        n_trees: params.n_trees,
        max_depth: params.max_depth,
        min_leaf: cfg.min_leaf,
        features_per_split: cfg.features_per_split,
        n_features,
        registry_version,
        training_seed: seed,
    })
}

impl ForestModel {
    /// Wraps hand-built trees, e.g. for tests or imported models.
    pub fn from_trees(
        trees: Vec<DecisionTree>,
        n_features: usize,
        registry_version: impl Into<String>,
    ) -> Result<Self> {
        let model = ForestModel {
            format: MODEL_FORMAT.to_string(),
            n_trees: trees.len(),
            trees,
            max_depth: 0,
            min_leaf: 1,
            features_per_split: n_features,
            n_features,
            registry_version: registry_version.into(),
            training_seed: 0,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != MODEL_FORMAT {
            return Err(Error::VersionMismatch {
                expected: MODEL_FORMAT.into(),
                found: self.format.clone(),
            });
        }
        if self.trees.is_empty() || self.trees.len() != self.n_trees {
            return Err(Error::Invalid("forest tree count mismatch".into()));
        }
        for tree in &self.trees {
            if tree
                .max_feature_index()
                .is_some_and(|f| f >= self.n_features)
            {
                return Err(Error::Invalid(
                    "split feature index outside registry".into(),
                ));
            }
            for node in &tree.nodes {
                if let Node::Split { left, right, .. } = node {
                    if *left >= tree.nodes.len() || *right >= tree.nodes.len() {
                        return Err(Error::Invalid("dangling child index".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Fraction of trees voting bot.
    pub fn score(&self, x: &FeatureVector) -> Result<f64> {
        if x.registry_version != self.registry_version {
            return Err(Error::VersionMismatch {
                expected: self.registry_version.clone(),
                found: x.registry_version.clone(),
            });
        }
        if x.len() != self.n_features {
            return Err(Error::Invalid(format!(
                "expected {} features, got {}",
                self.n_features,
                x.len()
            )));
        }
        Ok(self.score_values(&x.values))
    }

    pub(crate) fn score_values(&self, values: &[f64]) -> f64 {
        let votes = self.trees.iter().filter(|t| t.votes_bot(values)).count();
        votes as f64 / self.trees.len() as f64
    }

    /// Feature indices used by any split.
    pub fn used_features(&self) -> std::collections::BTreeSet<usize> {
        self.trees
            .iter()
            .flat_map(|t| t.nodes.iter())
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("forest serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: ForestModel = serde_json::from_str(s).map_err(|e| Error::Parse {
            file: "<forest>".into(),
            line: e.line(),
            message: e.to_string(),
        })?;
        model.validate()?;
        Ok(model)
    }
}
