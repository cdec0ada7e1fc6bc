//! CART regression trees with variance-reduction splits.
//!
//! Splits send `x[feature] <= threshold` left, where the threshold is the
//! largest feature value routed left; comparing against an observed value
//! keeps partitioning exact in floating point. Ties on impurity break
//! towards the lowest feature index, then the lowest threshold, so trees
//! are identical across platforms.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A fitted tree node; splits own their children.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
}

impl TreeNode {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*feature] <= *threshold { left } else { right };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// Growth limits and per-split feature subsampling.
#[derive(Debug, Clone, Copy)]
pub struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// Features considered per split; `None` means all.
    pub feature_subsample: Option<usize>,
}

/// Minimum impurity improvement for a split to count, relative to the
/// node's second moment; guards against float-noise splits.
const MIN_IMPROVEMENT_REL: f64 = 1e-12;

struct BestSplit {
    feature: usize,
    threshold: f64,
    score: f64,
    left_count: usize,
}

/// Grows a tree over `indices` into `(x, y)`.
pub fn grow_tree(
    x: &[Vec<f64>],
    y: &[f64],
    indices: &[usize],
    config: &TreeConfig,
    rng: &mut ChaCha8Rng,
) -> TreeNode {
    grow_node(x, y, indices, config, rng, 0)
}

fn node_mean(y: &[f64], indices: &[usize]) -> f64 {
    indices.iter().map(|&i| y[i]).sum::<f64>() / indices.len() as f64
}

fn choose_features(p: usize, config: &TreeConfig, rng: &mut ChaCha8Rng) -> Vec<usize> {
    match config.feature_subsample {
        Some(m) if m < p => {
            // Partial Fisher-Yates, then sorted so the impurity scan walks
            // features in ascending order (deterministic tie-breaking).
            let mut pool: Vec<usize> = (0..p).collect();
            for i in 0..m {
                let j = i + rand::Rng::gen_range(rng, 0..p - i);
                pool.swap(i, j);
            }
            let mut chosen = pool[..m].to_vec();
            chosen.sort_unstable();
            chosen
        }
        _ => (0..p).collect(),
    }
}

fn find_best_split(
    x: &[Vec<f64>],
    y: &[f64],
    indices: &[usize],
    features: &[usize],
    min_leaf: usize,
) -> Option<BestSplit> {
    let n = indices.len();
    let total_sum: f64 = indices.iter().map(|&i| y[i]).sum();
    let total_sq: f64 = indices.iter().map(|&i| y[i] * y[i]).sum();
    let baseline = total_sum * total_sum / n as f64;
    let min_gain = MIN_IMPROVEMENT_REL * total_sq.max(1.0);

    let mut best: Option<BestSplit> = None;
    let mut column: Vec<(f64, f64)> = Vec::with_capacity(n);
    for &feature in features {
        column.clear();
        column.extend(indices.iter().map(|&i| (x[i][feature], y[i])));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left_sum = 0.0;
        let mut left_count = 0usize;
        for i in 0..n - 1 {
            left_sum += column[i].1;
            left_count += 1;
            if column[i].0 == column[i + 1].0 {
                continue; // cannot separate equal values
            }
            if left_count < min_leaf || n - left_count < min_leaf {
                continue;
            }
            let right_sum = total_sum - left_sum;
            let score = left_sum * left_sum / left_count as f64
                + right_sum * right_sum / (n - left_count) as f64;
            if score > baseline + min_gain && best.as_ref().map_or(true, |b| score > b.score) {
                best = Some(BestSplit {
                    feature,
                    threshold: column[i].0,
                    score,
                    left_count,
                });
            }
        }
    }
    best
}

fn grow_node(
    x: &[Vec<f64>],
    y: &[f64],
    indices: &[usize],
    config: &TreeConfig,
    rng: &mut ChaCha8Rng,
    depth: usize,
) -> TreeNode {
    let leaf = || TreeNode::Leaf {
        value: node_mean(y, indices),
    };
    if indices.len() < 2 * config.min_leaf.max(1) {
        return leaf();
    }
    if let Some(max_depth) = config.max_depth {
        if depth >= max_depth {
            return leaf();
        }
    }
    let p = x.first().map_or(0, Vec::len);
    let features = choose_features(p, config, rng);
    let Some(split) = find_best_split(x, y, indices, &features, config.min_leaf.max(1)) else {
        return leaf();
    };

    let mut left_idx = Vec::with_capacity(split.left_count);
    let mut right_idx = Vec::with_capacity(indices.len() - split.left_count);
    for &i in indices {
        if x[i][split.feature] <= split.threshold {
            left_idx.push(i);
        } else {
            right_idx.push(i);
        }
    }
    debug_assert_eq!(left_idx.len(), split.left_count);

    TreeNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow_node(x, y, &left_idx, config, rng, depth + 1)),
        right: Box::new(grow_node(x, y, &right_idx, config, rng, depth + 1)),
    }
}
