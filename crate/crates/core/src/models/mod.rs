//! Regression model zoo behind one fit/predict contract.
//!
//! Eight architectures share the [`Regressor`] interface: a
//! moving-average baseline, linear/ridge/lasso least squares, Poisson
//! GLM, k-nearest neighbors, random forests, and gradient boosting.
//! Every fit is deterministic given `(data, seed)`, and fitted models
//! serialize to a versioned JSON format that reproduces predictions
//! exactly on reload.

mod ensemble;
mod linalg;
mod linear;
mod poisson;
mod tree;

pub use ensemble::{BoostFit, ForestFit};
pub use linear::LinearFit;
pub use tree::TreeNode;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{0}")]
    Argument(String),
    #[error("{0}")]
    Domain(String),
    #[error("model failed to converge: {0}")]
    NonConvergence(String),
    #[error("predict called before a successful fit")]
    NotFitted,
    #[error("feature count mismatch: model has {expected}, input has {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("model (de)serialization failed: {0}")]
    Serialization(String),
}

/// The eight architectures of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    MovingAverage,
    Linear,
    Ridge,
    Lasso,
    Poisson,
    Knn,
    RandomForest,
    GradientBoosting,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::MovingAverage,
        ModelKind::Linear,
        ModelKind::Ridge,
        ModelKind::Lasso,
        ModelKind::Poisson,
        ModelKind::Knn,
        ModelKind::RandomForest,
        ModelKind::GradientBoosting,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::MovingAverage => "moving_average",
            ModelKind::Linear => "linear",
            ModelKind::Ridge => "ridge",
            ModelKind::Lasso => "lasso",
            ModelKind::Poisson => "poisson",
            ModelKind::Knn => "knn",
            ModelKind::RandomForest => "random_forest",
            ModelKind::GradientBoosting => "gradient_boosting",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.label() == s)
            .ok_or_else(|| ModelError::Argument(format!("unknown model kind {s:?}")))
    }
}

/// Kind-specific hyperparameters. All defaults are documented in
/// [`default_hyperparameters`] and overridable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Hyperparameters {
    /// `target_columns`: indices averaged by the baseline; empty means
    /// every column.
    MovingAverage { target_columns: Vec<usize> },
    Linear {},
    Ridge {
        lambda: f64,
    },
    Lasso {
        lambda: f64,
        tol: f64,
        max_sweeps: usize,
    },
    Poisson {
        max_iterations: usize,
        max_step_halvings: usize,
    },
    Knn {
        k: usize,
    },
    RandomForest {
        n_trees: usize,
        /// Features per split; `None` means `ceil(p/3)`.
        feature_subsample: Option<usize>,
        min_leaf: usize,
        max_depth: Option<usize>,
    },
    GradientBoosting {
        n_trees: usize,
        max_depth: usize,
        learning_rate: f64,
    },
}

impl Hyperparameters {
    fn kind(&self) -> ModelKind {
        match self {
            Hyperparameters::MovingAverage { .. } => ModelKind::MovingAverage,
            Hyperparameters::Linear {} => ModelKind::Linear,
            Hyperparameters::Ridge { .. } => ModelKind::Ridge,
            Hyperparameters::Lasso { .. } => ModelKind::Lasso,
            Hyperparameters::Poisson { .. } => ModelKind::Poisson,
            Hyperparameters::Knn { .. } => ModelKind::Knn,
            Hyperparameters::RandomForest { .. } => ModelKind::RandomForest,
            Hyperparameters::GradientBoosting { .. } => ModelKind::GradientBoosting,
        }
    }
}

/// Documented defaults per kind, mirroring common ML-framework settings.
pub fn default_hyperparameters(kind: ModelKind) -> Hyperparameters {
    match kind {
        ModelKind::MovingAverage => Hyperparameters::MovingAverage {
            target_columns: Vec::new(),
        },
        ModelKind::Linear => Hyperparameters::Linear {},
        ModelKind::Ridge => Hyperparameters::Ridge { lambda: 1.0 },
        ModelKind::Lasso => Hyperparameters::Lasso {
            lambda: 0.1,
            tol: 1e-6,
            max_sweeps: 10_000,
        },
        ModelKind::Poisson => Hyperparameters::Poisson {
            max_iterations: 100,
            max_step_halvings: 10,
        },
        ModelKind::Knn => Hyperparameters::Knn { k: 5 },
        ModelKind::RandomForest => Hyperparameters::RandomForest {
            n_trees: 100,
            feature_subsample: None,
            min_leaf: 1,
            max_depth: None,
        },
        ModelKind::GradientBoosting => Hyperparameters::GradientBoosting {
            n_trees: 100,
            max_depth: 3,
            learning_rate: 0.1,
        },
    }
}

/// Opaque fitted state; n_features is recorded for predict-time checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case")]
enum FittedState {
    MovingAverage { target_columns: Vec<usize> },
    Linear { fit: LinearFit },
    Ridge { fit: LinearFit },
    Lasso { fit: LinearFit },
    Poisson { fit: LinearFit },
    Knn { x: Vec<Vec<f64>>, y: Vec<f64> },
    RandomForest { fit: ForestFit },
    GradientBoosting { fit: BoostFit },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Fitted {
    n_features: usize,
    state: FittedState,
}

/// One regression model: a kind, its hyperparameters, and (after
/// [`Regressor::fit`]) an opaque fitted state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regressor {
    kind: ModelKind,
    hyperparameters: Hyperparameters,
    fitted: Option<Fitted>,
}

/// Version tag of the model JSON format.
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SerializedRegressor {
    format_version: u32,
    regressor: Regressor,
}

impl Regressor {
    /// A regressor of `kind` with default hyperparameters.
    pub fn new(kind: ModelKind) -> Self {
        Regressor {
            kind,
            hyperparameters: default_hyperparameters(kind),
            fitted: None,
        }
    }

    /// A regressor with explicit hyperparameters (kind inferred).
    pub fn with_hyperparameters(hyperparameters: Hyperparameters) -> Self {
        Regressor {
            kind: hyperparameters.kind(),
            hyperparameters,
            fitted: None,
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn hyperparameters(&self) -> &Hyperparameters {
        &self.hyperparameters
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted.is_some()
    }

    /// Fits the model. Deterministic given `(x, y, seed)`; any prior
    /// fitted state is replaced only on success.
    pub fn fit(&mut self, x: &[Vec<f64>], y: &[f64], seed: u64) -> Result<(), ModelError> {
        let (_, p) = validate_xy(x, y)?;
        let state = match &self.hyperparameters {
            Hyperparameters::MovingAverage { target_columns } => {
                let columns = if target_columns.is_empty() {
                    (0..p).collect()
                } else {
                    if let Some(&bad) = target_columns.iter().find(|&&c| c >= p) {
                        return Err(ModelError::Argument(format!(
                            "moving-average column {bad} out of range for {p} features"
                        )));
                    }
                    target_columns.clone()
                };
                FittedState::MovingAverage {
                    target_columns: columns,
                }
            }
            Hyperparameters::Linear {} => FittedState::Linear {
                fit: linear::fit_ols(x, y),
            },
            Hyperparameters::Ridge { lambda } => FittedState::Ridge {
                fit: linear::fit_ridge(x, y, *lambda)?,
            },
            Hyperparameters::Lasso {
                lambda,
                tol,
                max_sweeps,
            } => {
                let (fit, _) = linear::fit_lasso(x, y, *lambda, *tol, *max_sweeps)?;
                FittedState::Lasso { fit }
            }
            Hyperparameters::Poisson {
                max_iterations,
                max_step_halvings,
            } => {
                let (fit, _) = poisson::fit_poisson(x, y, *max_iterations, *max_step_halvings)?;
                FittedState::Poisson { fit }
            }
            Hyperparameters::Knn { k } => {
                if *k == 0 {
                    return Err(ModelError::Argument("knn needs k >= 1".into()));
                }
                FittedState::Knn {
                    x: x.to_vec(),
                    y: y.to_vec(),
                }
            }
            Hyperparameters::RandomForest {
                n_trees,
                feature_subsample,
                min_leaf,
                max_depth,
            } => FittedState::RandomForest {
                fit: ensemble::fit_forest(
                    x,
                    y,
                    *n_trees,
                    *feature_subsample,
                    *min_leaf,
                    *max_depth,
                    seed,
                ),
            },
            Hyperparameters::GradientBoosting {
                n_trees,
                max_depth,
                learning_rate,
            } => FittedState::GradientBoosting {
                fit: ensemble::fit_boosting(x, y, *n_trees, *max_depth, *learning_rate),
            },
        };
        self.fitted = Some(Fitted {
            n_features: p,
            state,
        });
        Ok(())
    }

    /// Predictions for each row; requires a prior successful fit and the
    /// training feature count.
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>, ModelError> {
        let fitted = self.fitted.as_ref().ok_or(ModelError::NotFitted)?;
        for row in x {
            if row.len() != fitted.n_features {
                return Err(ModelError::DimensionMismatch {
                    expected: fitted.n_features,
                    got: row.len(),
                });
            }
        }
        Ok(match &fitted.state {
            FittedState::MovingAverage { target_columns } => x
                .iter()
                .map(|row| {
                    target_columns.iter().map(|&c| row[c]).sum::<f64>()
                        / target_columns.len() as f64
                })
                .collect(),
            FittedState::Linear { fit }
            | FittedState::Ridge { fit }
            | FittedState::Lasso { fit } => x.iter().map(|row| fit.predict_row(row)).collect(),
            FittedState::Poisson { fit } => x
                .iter()
                .map(|row| poisson::predict_poisson(fit, row))
                .collect(),
            FittedState::Knn { x: train_x, y } => {
                let k = match self.hyperparameters {
                    Hyperparameters::Knn { k } => k.min(train_x.len()),
                    _ => unreachable!("knn state implies knn hyperparameters"),
                };
                x.iter().map(|row| knn_predict(train_x, y, row, k)).collect()
            }
            FittedState::RandomForest { fit } => {
                x.iter().map(|row| fit.predict_row(row)).collect()
            }
            FittedState::GradientBoosting { fit } => {
                x.iter().map(|row| fit.predict_row(row)).collect()
            }
        })
    }

    /// Versioned JSON encoding of the full model (hyperparameters and
    /// fitted state).
    pub fn to_json(&self) -> Result<String, ModelError> {
        serde_json::to_string_pretty(&SerializedRegressor {
            format_version: MODEL_FORMAT_VERSION,
            regressor: self.clone(),
        })
        .map_err(|e| ModelError::Serialization(e.to_string()))
    }

    pub fn from_json(json: &str) -> Result<Regressor, ModelError> {
        let wrapper: SerializedRegressor =
            serde_json::from_str(json).map_err(|e| ModelError::Serialization(e.to_string()))?;
        if wrapper.format_version != MODEL_FORMAT_VERSION {
            return Err(ModelError::Serialization(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                wrapper.format_version
            )));
        }
        Ok(wrapper.regressor)
    }
}

/// Mean target of the `k` nearest training rows by Euclidean distance;
/// distance ties break towards the lowest training-row index.
fn knn_predict(train_x: &[Vec<f64>], train_y: &[f64], row: &[f64], k: usize) -> f64 {
    let mut distances: Vec<(f64, usize)> = train_x
        .iter()
        .enumerate()
        .map(|(i, candidate)| {
            let d2: f64 = candidate
                .iter()
                .zip(row.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (d2, i)
        })
        .collect();
    distances.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    distances[..k].iter().map(|&(_, i)| train_y[i]).sum::<f64>() / k as f64
}

fn validate_xy(x: &[Vec<f64>], y: &[f64]) -> Result<(usize, usize), ModelError> {
    if x.is_empty() {
        return Err(ModelError::Argument("training data is empty".into()));
    }
    if x.len() != y.len() {
        return Err(ModelError::Argument(format!(
            "{} rows but {} targets",
            x.len(),
            y.len()
        )));
    }
    let p = x[0].len();
    if p == 0 {
        return Err(ModelError::Argument("training data has no features".into()));
    }
    for (i, row) in x.iter().enumerate() {
        if row.len() != p {
            return Err(ModelError::Argument(format!(
                "ragged matrix: row {i} has {} features, expected {p}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::Argument(format!(
                "non-finite feature in row {i}"
            )));
        }
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(ModelError::Argument(format!("non-finite target at row {i}")));
    }
    Ok((x.len(), p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngutil::rng_for;
    use rand::Rng;

    fn toy_problem(seed: u64, n: usize, p: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut rng = rng_for(seed, 0);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..p).map(|_| rng.gen_range(0.0..10.0)).collect())
            .collect();
        let y: Vec<f64> = x
            .iter()
            .map(|r| 3.0 + r.iter().sum::<f64>() + rng.gen_range(-0.5..0.5))
            .collect();
        (x, y)
    }

    #[test]
    fn documented_defaults() {
        match default_hyperparameters(ModelKind::RandomForest) {
            Hyperparameters::RandomForest { n_trees, .. } => assert_eq!(n_trees, 100),
            _ => unreachable!(),
        }
        match default_hyperparameters(ModelKind::Knn) {
            Hyperparameters::Knn { k } => assert_eq!(k, 5),
            _ => unreachable!(),
        }
        match default_hyperparameters(ModelKind::GradientBoosting) {
            Hyperparameters::GradientBoosting {
                n_trees,
                max_depth,
                learning_rate,
            } => {
                assert_eq!(n_trees, 100);
                assert_eq!(max_depth, 3);
                assert_eq!(learning_rate, 0.1);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn kind_labels_round_trip() {
        for kind in ModelKind::ALL {
            assert_eq!(kind.label().parse::<ModelKind>().unwrap(), kind);
        }
        assert!("svr".parse::<ModelKind>().is_err());
    }

    #[test]
    fn predict_before_fit_errors() {
        let model = Regressor::new(ModelKind::Linear);
        assert!(matches!(
            model.predict(&[vec![1.0]]),
            Err(ModelError::NotFitted)
        ));
    }

    #[test]
    fn dimension_mismatch_on_predict() {
        let (x, y) = toy_problem(1, 30, 3);
        let mut model = Regressor::new(ModelKind::Linear);
        model.fit(&x, &y, 0).unwrap();
        assert!(matches!(
            model.predict(&[vec![1.0, 2.0]]),
            Err(ModelError::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn ragged_and_empty_inputs_rejected() {
        let mut model = Regressor::new(ModelKind::Linear);
        assert!(model.fit(&[], &[], 0).is_err());
        assert!(model
            .fit(&[vec![1.0], vec![2.0, 3.0]], &[1.0, 2.0], 0)
            .is_err());
        assert!(model
            .fit(&[vec![1.0], vec![f64::NAN]], &[1.0, 2.0], 0)
            .is_err());
    }

    #[test]
    fn moving_average_predicts_constant_series_exactly() {
        let x = vec![vec![7.0; 5]; 10];
        let y = vec![7.0; 10];
        let mut model = Regressor::new(ModelKind::MovingAverage);
        model.fit(&x, &y, 0).unwrap();
        let pred = model.predict(&x).unwrap();
        assert!(pred.iter().all(|&v| v == 7.0));
    }

    #[test]
    fn moving_average_ignores_non_target_columns() {
        // Columns 0..2 are lags, column 3 is noise.
        let x = vec![
            vec![1.0, 2.0, 3.0, 99.0],
            vec![4.0, 5.0, 6.0, -50.0],
        ];
        let y = vec![0.0, 0.0];
        let mut model = Regressor::with_hyperparameters(Hyperparameters::MovingAverage {
            target_columns: vec![0, 1, 2],
        });
        model.fit(&x, &y, 0).unwrap();
        assert_eq!(model.predict(&x).unwrap(), vec![2.0, 5.0]);
    }

    #[test]
    fn knn_k1_retrieves_training_targets() {
        let (x, y) = toy_problem(2, 25, 4);
        let mut model =
            Regressor::with_hyperparameters(Hyperparameters::Knn { k: 1 });
        model.fit(&x, &y, 0).unwrap();
        let pred = model.predict(&x).unwrap();
        assert_eq!(pred, y);
    }

    #[test]
    fn knn_distance_ties_break_by_lowest_index() {
        // Two training rows at the same location with different targets.
        let x = vec![vec![0.0], vec![0.0], vec![5.0]];
        let y = vec![10.0, 20.0, 30.0];
        let mut model = Regressor::with_hyperparameters(Hyperparameters::Knn { k: 1 });
        model.fit(&x, &y, 0).unwrap();
        assert_eq!(model.predict(&[vec![0.0]]).unwrap(), vec![10.0]);
    }

    #[test]
    fn every_kind_fits_predicts_and_serializes_identically() {
        let (x, y) = toy_problem(3, 60, 4);
        let (x_test, _) = toy_problem(4, 10, 4);
        for kind in ModelKind::ALL {
            let mut model = Regressor::new(kind);
            model.fit(&x, &y, 42).unwrap();
            let pred = model.predict(&x_test).unwrap();
            let json = model.to_json().unwrap();
            let restored = Regressor::from_json(&json).unwrap();
            let re_pred = restored.predict(&x_test).unwrap();
            assert_eq!(pred, re_pred, "{kind}: reload changed predictions");
        }
    }

    #[test]
    fn serialization_rejects_unknown_version() {
        let (x, y) = toy_problem(5, 20, 2);
        let mut model = Regressor::new(ModelKind::Ridge);
        model.fit(&x, &y, 0).unwrap();
        let json = model.to_json().unwrap().replace(
            "\"format_version\": 1",
            "\"format_version\": 999",
        );
        assert!(matches!(
            Regressor::from_json(&json),
            Err(ModelError::Serialization(_))
        ));
    }

    #[test]
    fn fits_are_deterministic_given_seed() {
        let (x, y) = toy_problem(6, 80, 5);
        for kind in ModelKind::ALL {
            let mut a = Regressor::new(kind);
            let mut b = Regressor::new(kind);
            a.fit(&x, &y, 9).unwrap();
            b.fit(&x, &y, 9).unwrap();
            assert_eq!(
                a.to_json().unwrap(),
                b.to_json().unwrap(),
                "{kind} not deterministic"
            );
        }
    }

    #[test]
    fn closed_form_models_invariant_to_row_order() {
        let (x, y) = toy_problem(7, 50, 3);
        let (x_test, _) = toy_problem(8, 8, 3);
        // Reversal is a fixed permutation applied jointly to rows/targets.
        let x_rev: Vec<Vec<f64>> = x.iter().rev().cloned().collect();
        let y_rev: Vec<f64> = y.iter().rev().copied().collect();
        for kind in [
            ModelKind::MovingAverage,
            ModelKind::Linear,
            ModelKind::Ridge,
            ModelKind::Lasso,
            ModelKind::Poisson,
        ] {
            let mut a = Regressor::new(kind);
            let mut b = Regressor::new(kind);
            a.fit(&x, &y, 0).unwrap();
            b.fit(&x_rev, &y_rev, 0).unwrap();
            for (pa, pb) in a
                .predict(&x_test)
                .unwrap()
                .iter()
                .zip(b.predict(&x_test).unwrap().iter())
            {
                assert!(
                    (pa - pb).abs() <= 1e-9 * (1.0 + pa.abs()),
                    "{kind}: row order changed predictions: {pa} vs {pb}"
                );
            }
        }
    }

    #[test]
    fn poisson_exponentiates_predictions() {
        let x: Vec<Vec<f64>> = (0..50).map(|i| vec![(i % 5) as f64]).collect();
        let y: Vec<f64> = x.iter().map(|r| (0.5 + 0.3 * r[0]).exp().round()).collect();
        let mut model = Regressor::new(ModelKind::Poisson);
        model.fit(&x, &y, 0).unwrap();
        let pred = model.predict(&x).unwrap();
        assert!(pred.iter().all(|&v| v > 0.0));
    }
}
