use rand::Rng;
use serde::{Deserialize, Serialize};

/// One node of a decision tree. Samples with `value < threshold` go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        bot: u32,
        human: u32,
    },
}

/// Axis-aligned binary tree stored as a flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    /// A single-leaf tree holding the given votes.
    pub fn leaf(bot: u32, human: u32) -> Self {
        DecisionTree {
            nodes: vec![Node::Leaf { bot, human }],
        }
    }

    /// Leaf reached by `x`.
    pub fn leaf_for(&self, x: &[f64]) -> (u32, u32) {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[feature] < threshold { left } else { right },
                Node::Leaf { bot, human } => return (bot, human),
            }
        }
    }

    /// The tree votes bot when its leaf holds strictly more bot than human
    /// samples.
    pub fn votes_bot(&self, x: &[f64]) -> bool {
        let (bot, human) = self.leaf_for(x);
        bot > human
    }

    pub fn max_feature_index(&self) -> Option<usize> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf { .. } => None,
            })
            .max()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }
}

pub(crate) struct TreeConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub features_per_split: usize,
}

/// Column-major training matrix.
pub(crate) struct Matrix<'a> {
    pub columns: &'a [Vec<f64>],
    pub is_bot: &'a [bool],
}

pub(crate) fn grow<R: Rng>(
    data: &Matrix<'_>,
    sample: Vec<usize>,
    cfg: &TreeConfig,
    rng: &mut R,
) -> DecisionTree {
    let mut builder = Builder {
        data,
        cfg,
        nodes: Vec::new(),
        feature_pool: (0..data.columns.len()).collect(),
        scratch: Vec::with_capacity(sample.len()),
    };
    builder.build(sample, 0, rng);
    DecisionTree {
        nodes: builder.nodes,
    }
}

struct Builder<'a, 'b> {
    data: &'a Matrix<'b>,
    cfg: &'a TreeConfig,
    nodes: Vec<Node>,
    feature_pool: Vec<usize>,
    scratch: Vec<(f64, bool)>,
}

fn gini(bot: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = bot as f64 / n as f64;
    2.0 * p * (1.0 - p)
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl Builder<'_, '_> {
    fn build<R: Rng>(&mut self, sample: Vec<usize>, depth: usize, rng: &mut R) -> usize {
        let n = sample.len();
        let bot = sample.iter().filter(|&&i| self.data.is_bot[i]).count();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            bot: bot as u32,
            human: (n - bot) as u32,
        });
        if depth >= self.cfg.max_depth || bot == 0 || bot == n || n < 2 * self.cfg.min_leaf {
            return id;
        }
        let Some(split) = self.best_split(&sample, bot, rng) else {
            return id;
        };
        let column = &self.data.columns[split.feature];
        let (left, right): (Vec<usize>, Vec<usize>) = sample
            .into_iter()
            .partition(|&i| column[i] < split.threshold);
        let left_id = self.build(left, depth + 1, rng);
        let right_id = self.build(right, depth + 1, rng);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: left_id,
            right: right_id,
        };
        id
    }

    fn best_split<R: Rng>(
        &mut self,
        sample: &[usize],
        bot_total: usize,
        rng: &mut R,
    ) -> Option<BestSplit> {
        let n = sample.len();
        let n_features = self.feature_pool.len();
        let k = self.cfg.features_per_split.clamp(1, n_features);
        // Partial Fisher-Yates: the first k entries become the candidate set.
        for i in 0..k {
            let j = rng.gen_range(i..n_features);
            self.feature_pool.swap(i, j);
        }
        let parent = gini(bot_total, n);
        let mut best: Option<BestSplit> = None;
        for fi in 0..k {
            let feature = self.feature_pool[fi];
            let column = &self.data.columns[feature];
            self.scratch.clear();
            self.scratch
                .extend(sample.iter().map(|&i| (column[i], self.data.is_bot[i])));
            self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_bot = 0usize;
            for pos in 0..n - 1 {
                if self.scratch[pos].1 {
                    left_bot += 1;
                }
                let n_left = pos + 1;
                let n_right = n - n_left;
                let (lo, hi) = (self.scratch[pos].0, self.scratch[pos + 1].0);
                if lo == hi || n_left < self.cfg.min_leaf || n_right < self.cfg.min_leaf {
                    continue;
                }
                let impurity = (n_left as f64 * gini(left_bot, n_left)
                    + n_right as f64 * gini(bot_total - left_bot, n_right))
                    / n as f64;
                if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                    let mid = lo + (hi - lo) / 2.0;
                    let threshold = if mid > lo { mid } else { hi };
                    best = Some(BestSplit {
                        feature,
                        threshold,
                        impurity,
                    });
                }
            }
        }
        best.filter(|b| b.impurity < parent - 1e-12)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ties_at_threshold_go_right() {
        let tree = DecisionTree {
            nodes: vec![
                Node::Split {
                    feature: 0,
                    threshold: 1.0,
                    left: 1,
                    right: 2,
                },
                Node::Leaf { bot: 0, human: 3 },
                Node::Leaf { bot: 3, human: 0 },
            ],
        };
        assert!(!tree.votes_bot(&[0.999]));
        assert!(tree.votes_bot(&[1.0]));
        assert_eq!(tree.depth(), 1);
    }

    #[test]
    fn even_leaf_votes_human() {
        assert!(!DecisionTree::leaf(2, 2).votes_bot(&[]));
        assert!(DecisionTree::leaf(3, 2).votes_bot(&[]));
    }

    #[test]
    fn splits_at_midpoint_of_distinct_values() {
        let columns = vec![vec![1.0, 2.0, 4.0, 8.0]];
        let is_bot = vec![false, false, true, true];
        let m = Matrix {
            columns: &columns,
            is_bot: &is_bot,
        };
        let cfg = TreeConfig {
            max_depth: 5,
            min_leaf: 1,
            features_per_split: 1,
        };
        let tree = grow(
            &m,
            vec![0, 1, 2, 3],
            &cfg,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        match tree.nodes[0] {
            Node::Split { threshold, .. } => assert_eq!(threshold, 3.0),
            _ => panic!("expected a split"),
        }
        assert_eq!(tree.depth(), 1);
    }

    #[test]
    fn min_leaf_blocks_small_children() {
        let columns = vec![vec![1.0, 2.0, 3.0, 4.0]];
        let is_bot = vec![true, false, false, false];
        let m = Matrix {
            columns: &columns,
            is_bot: &is_bot,
        };
        let cfg = TreeConfig {
            max_depth: 5,
            min_leaf: 2,
            features_per_split: 1,
        };
        let tree = grow(
            &m,
            vec![0, 1, 2, 3],
            &cfg,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        for node in &tree.nodes {
            if let Node::Leaf { bot, human } = node {
                assert!(bot + human >= 2);
            }
        }
    }
}
