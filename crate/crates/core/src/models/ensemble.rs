//! Tree ensembles: bootstrap random forests and gradient boosting.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rngutil::rng_for;

use super::tree::{grow_tree, TreeConfig, TreeNode};

/// A fitted random forest: average of bootstrap-trained trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestFit {
    pub trees: Vec<TreeNode>,
}

impl ForestFit {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
    }
}

/// Fits `n_trees` CART trees on bootstrap resamples with per-split
/// feature subsampling (`ceil(p/3)` unless overridden).
///
/// Each tree derives its own RNG from `(seed, tree_index)` and trees are
/// collected in index order, so the forest is bit-identical for a given
/// seed regardless of how many threads build it.
pub fn fit_forest(
    x: &[Vec<f64>],
    y: &[f64],
    n_trees: usize,
    feature_subsample: Option<usize>,
    min_leaf: usize,
    max_depth: Option<usize>,
    seed: u64,
) -> ForestFit {
    let n = x.len();
    let p = x.first().map_or(0, Vec::len);
    let config = TreeConfig {
        max_depth,
        min_leaf,
        feature_subsample: Some(feature_subsample.unwrap_or(p.div_ceil(3)).clamp(1, p.max(1))),
    };
    let trees: Vec<TreeNode> = (0..n_trees)
        .into_par_iter()
        .map(|tree_index| {
            let mut rng = rng_for(seed, tree_index as u64);
            let indices: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            grow_tree(x, y, &indices, &config, &mut rng)
        })
        .collect();
    ForestFit { trees }
}

/// A fitted gradient-boosting ensemble: `base + rate * sum(trees)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostFit {
    pub base: f64,
    pub learning_rate: f64,
    pub trees: Vec<TreeNode>,
}

impl BoostFit {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.base
            + self.learning_rate
                * self
                    .trees
                    .iter()
                    .map(|t| t.predict_row(row))
                    .sum::<f64>()
    }
}

/// Stagewise squared-loss boosting: each tree fits the current residuals
/// at limited depth and joins the ensemble scaled by the learning rate.
/// No row or feature subsampling, so the fit is deterministic outright.
pub fn fit_boosting(
    x: &[Vec<f64>],
    y: &[f64],
    n_trees: usize,
    max_depth: usize,
    learning_rate: f64,
) -> BoostFit {
    let n = x.len();
    let base = crate::stats::mean(y);
    let config = TreeConfig {
        max_depth: Some(max_depth),
        min_leaf: 1,
        feature_subsample: None,
    };
    let indices: Vec<usize> = (0..n).collect();
    let mut rng = rng_for(0, 0); // unused: no subsampling anywhere
    let mut prediction = vec![base; n];
    let mut residuals = vec![0.0; n];
    let mut trees = Vec::with_capacity(n_trees);
    for _ in 0..n_trees {
        for i in 0..n {
            residuals[i] = y[i] - prediction[i];
        }
        let tree = grow_tree(x, &residuals, &indices, &config, &mut rng);
        for i in 0..n {
            prediction[i] += learning_rate * tree.predict_row(&x[i]);
        }
        trees.push(tree);
    }
    BoostFit {
        base,
        learning_rate,
        trees,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngutil::rng_for;
    use rand::Rng;

    fn sine_problem(seed: u64, n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = rng_for(seed, 0);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let y: Vec<f64> = x
            .iter()
            .map(|row| row[0].sin() + 0.1 * rng.gen_range(-1.0..1.0))
            .collect();
        (x, y)
    }

    fn rmse(pred: &[f64], actual: &[f64]) -> f64 {
        let s: f64 = pred
            .iter()
            .zip(actual)
            .map(|(p, a)| (p - a) * (p - a))
            .sum();
        (s / pred.len() as f64).sqrt()
    }

    #[test]
    fn forest_beats_mean_baseline_on_held_out_data() {
        let (x_train, y_train) = sine_problem(1, 200);
        let (x_test, y_test) = sine_problem(2, 100);
        let forest = fit_forest(&x_train, &y_train, 100, None, 1, None, 7);
        let pred: Vec<f64> = x_test.iter().map(|r| forest.predict_row(r)).collect();
        let mean = crate::stats::mean(&y_train);
        let baseline = rmse(&vec![mean; y_test.len()], &y_test);
        let model = rmse(&pred, &y_test);
        assert!(model < baseline, "forest {model} vs baseline {baseline}");
    }

    #[test]
    fn forest_deterministic_across_thread_counts() {
        let (x, y) = sine_problem(3, 150);
        let fit_in_pool = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| fit_forest(&x, &y, 60, None, 1, None, 11))
        };
        let single = fit_in_pool(1);
        let multi = fit_in_pool(4);
        assert_eq!(
            serde_json::to_string(&single).unwrap(),
            serde_json::to_string(&multi).unwrap()
        );
    }

    #[test]
    fn forest_seed_changes_trees() {
        let (x, y) = sine_problem(4, 100);
        let a = fit_forest(&x, &y, 10, None, 1, None, 1);
        let b = fit_forest(&x, &y, 10, None, 1, None, 2);
        assert_ne!(a, b);
    }

    #[test]
    fn boosting_reduces_training_error_monotonically_in_rounds() {
        let (x, y) = sine_problem(5, 150);
        let small = fit_boosting(&x, &y, 10, 3, 0.1);
        let large = fit_boosting(&x, &y, 100, 3, 0.1);
        let err = |fit: &BoostFit| {
            let pred: Vec<f64> = x.iter().map(|r| fit.predict_row(r)).collect();
            rmse(&pred, &y)
        };
        assert!(err(&large) < err(&small));
        // First `k` trees of a longer run coincide with a shorter run.
        assert_eq!(small.trees[..], large.trees[..10]);
    }

    #[test]
    fn boosting_is_deterministic() {
        let (x, y) = sine_problem(6, 120);
        let a = fit_boosting(&x, &y, 30, 3, 0.1);
        let b = fit_boosting(&x, &y, 30, 3, 0.1);
        assert_eq!(a, b);
    }
}
