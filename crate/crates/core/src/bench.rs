//! Bootstrap model comparison: resampled cycles, chronological splits,
//! headline RMSE statistics with percentile confidence intervals,
//! covariate-group improvement attribution, and permutation feature
//! importance.
//!
//! Each cycle resamples the daily records with replacement to the
//! original length, sorts the resample chronologically (duplicates
//! adjacent), rebuilds every (blend, representation) design matrix from
//! the resampled sequence, splits the first 80% of rows for training,
//! fits every model, and scores test RMSE. Two headline numbers per
//! model: "no additional data" (lag-only blend) and "any data" (lowest
//! error across all blends and representations). Cycles are independent
//! and may run in parallel; all randomness is derived from
//! `(seed, cycle, experiment, model)` indices, so reports are
//! byte-identical across runs and thread counts.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{DailyRecord, DailySeries};
use crate::features::{
    apply_scaler, build_windows_from_records, enumerate_experiments, fit_scaler, Blend,
    CovariateGroup, FeatureError, GapPolicy, Representation, WindowedDataset,
};
use crate::models::{Hyperparameters, ModelError, ModelKind, Regressor};
use crate::rngutil::{derive_seed, derive_seed2, rng_for};
use crate::stats;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}")]
    Argument(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Root mean squared error between predictions and actuals.
pub fn rmse(pred: &[f64], actual: &[f64]) -> Result<f64, BenchError> {
    if pred.is_empty() || pred.len() != actual.len() {
        return Err(BenchError::Argument(format!(
            "rmse needs equal non-empty lengths, got {} vs {}",
            pred.len(),
            actual.len()
        )));
    }
    let sum_sq: f64 = pred
        .iter()
        .zip(actual.iter())
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok((sum_sq / pred.len() as f64).sqrt())
}

/// Chronological split: the first `round(fraction * rows)` rows train
/// (ties round up), the rest test. Row order is preserved.
pub fn chrono_split(
    dataset: &WindowedDataset,
    train_fraction: f64,
) -> Result<(WindowedDataset, WindowedDataset), BenchError> {
    if !(0.0 < train_fraction && train_fraction < 1.0) {
        return Err(BenchError::Argument(format!(
            "train_fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let rows = dataset.n_rows();
    let train_size = (train_fraction * rows as f64 + 0.5).floor() as usize;
    if train_size == 0 || train_size >= rows {
        return Err(BenchError::Argument(format!(
            "split of {rows} rows at {train_fraction} leaves an empty side"
        )));
    }
    let take = |range: std::ops::Range<usize>| WindowedDataset {
        x: dataset.x[range.clone()].to_vec(),
        y: dataset.y[range.clone()].to_vec(),
        row_dates: dataset.row_dates[range].to_vec(),
        feature_names: dataset.feature_names.clone(),
        dropped_windows: dataset.dropped_windows,
    };
    Ok((take(0..train_size), take(train_size..rows)))
}

/// How bootstrap resampling interacts with the chronological split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BootstrapMode {
    /// Resample all records, sort by date, window the resampled sequence.
    SortedResample,
    /// Window the original series; resample only the training rows.
    ResampleTrainOnly,
}

/// Which rows feed the standardization statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalerScope {
    TrainOnly,
    FullSeries,
}

/// How the representation is selected within each blend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RepresentationSelection {
    /// Keep the representation with the lowest test RMSE (optimistic,
    /// but matches the benchmark protocol).
    TestRmse,
    /// Select on a validation carve-out from the training rows instead.
    ValidationRmse,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchOptions {
    pub n_cycles: usize,
    pub train_fraction: f64,
    pub window: usize,
    pub seed: u64,
    pub bootstrap_mode: BootstrapMode,
    pub scaler_scope: ScalerScope,
    pub representation_selection: RepresentationSelection,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            n_cycles: 100,
            train_fraction: 0.8,
            window: 5,
            seed: 0,
            bootstrap_mode: BootstrapMode::SortedResample,
            scaler_scope: ScalerScope::TrainOnly,
            representation_selection: RepresentationSelection::TestRmse,
        }
    }
}

/// Result of one experiment in one cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExperimentOutcome {
    Completed { rmse: f64 },
    Failed,
    Skipped,
}

impl ExperimentOutcome {
    pub fn rmse(&self) -> Option<f64> {
        match self {
            ExperimentOutcome::Completed { rmse } => Some(*rmse),
            _ => None,
        }
    }
}

/// Everything recorded for one bootstrap cycle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleResult {
    pub cycle_index: usize,
    /// `outcomes[model][experiment]`, experiment order as in the report.
    pub outcomes: Vec<Vec<ExperimentOutcome>>,
    /// `blend_scores[model][blend]`: test RMSE of the selected
    /// representation, `None` when every representation failed.
    pub blend_scores: Vec<Vec<Option<f64>>>,
}

/// Distribution of a statistic over cycles with a percentile 95% CI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub mean: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub values: Vec<f64>,
}

impl DistributionSummary {
    fn from_values(values: Vec<f64>) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        Some(DistributionSummary {
            mean: stats::mean(&values),
            ci95_low: stats::quantile(&values, 0.025),
            ci95_high: stats::quantile(&values, 0.975),
            values,
        })
    }
}

/// Mean RMSE change from requiring each covariate group; negative means
/// the group helps.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GroupDeltas {
    pub dow: f64,
    pub season: f64,
    pub weather: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSummary {
    pub model: ModelKind,
    pub no_additional: Option<DistributionSummary>,
    pub any_data: Option<DistributionSummary>,
    pub best_blend: String,
    pub best_representation: String,
    pub group_deltas: GroupDeltas,
    pub completed: usize,
    pub failed: usize,
    pub skipped: usize,
}

/// Label of one enumerated experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub blend: Blend,
    pub blend_label: String,
    pub representation: Representation,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub completed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub total: usize,
}

/// Architectures listed by the comparison but not built here; reports
/// carry them as explicit placeholders.
pub const NOT_IMPLEMENTED_MODELS: [&str; 2] = ["svr", "mlp"];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub options: BenchOptions,
    pub models: Vec<ModelKind>,
    pub experiments: Vec<ExperimentSpec>,
    pub blends: Vec<String>,
    pub cycles: Vec<CycleResult>,
    pub summaries: Vec<ModelSummary>,
    pub not_implemented: Vec<String>,
    pub counts: OutcomeCounts,
}

/// Intermediate per-experiment data inside one cycle.
struct ExperimentScores {
    /// Test RMSE per model, `None` on fit failure.
    test: Vec<Option<f64>>,
    /// Validation RMSE per model (only in validation-selection mode).
    validation: Vec<Option<f64>>,
}

fn resolve_moving_average(template: &Regressor, dataset: &WindowedDataset) -> Regressor {
    if template.kind() == ModelKind::MovingAverage {
        if let Hyperparameters::MovingAverage { target_columns } = template.hyperparameters() {
            if target_columns.is_empty() {
                return Regressor::with_hyperparameters(Hyperparameters::MovingAverage {
                    target_columns: dataset.target_lag_columns(),
                });
            }
        }
    }
    template.clone()
}

fn fit_and_score(
    template: &Regressor,
    train_x: &[Vec<f64>],
    train_y: &[f64],
    test_x: &[Vec<f64>],
    test_y: &[f64],
    seed: u64,
) -> Option<f64> {
    let mut model = template.clone();
    model.fit(train_x, train_y, seed).ok()?;
    let pred = model.predict(test_x).ok()?;
    rmse(&pred, test_y).ok()
}

#[allow(clippy::too_many_arguments)]
fn score_experiment(
    dataset: &WindowedDataset,
    representation: Representation,
    models: &[Regressor],
    options: &BenchOptions,
    cycle_seed: u64,
    experiment_index: usize,
    resample_train: Option<&[usize]>,
) -> Result<ExperimentScores, BenchError> {
    let (train, test) = chrono_split(dataset, options.train_fraction)?;

    // In resample-train-only mode the training rows are redrawn with
    // replacement; the test rows stay untouched.
    let (train_x_raw, train_y): (Vec<Vec<f64>>, Vec<f64>) = match resample_train {
        Some(indices) => indices
            .iter()
            .map(|&i| {
                let i = i % train.n_rows();
                (train.x[i].clone(), train.y[i])
            })
            .unzip(),
        None => (train.x.clone(), train.y.clone()),
    };

    let (train_x, test_x) = if representation.scaled() {
        let scaler = match options.scaler_scope {
            ScalerScope::TrainOnly => fit_scaler(&train_x_raw)?,
            ScalerScope::FullSeries => {
                let mut all = train_x_raw.clone();
                all.extend(test.x.iter().cloned());
                fit_scaler(&all)?
            }
        };
        (
            apply_scaler(&scaler, &train_x_raw),
            apply_scaler(&scaler, &test.x),
        )
    } else {
        (train_x_raw, test.x.clone())
    };

    let mut test_scores = Vec::with_capacity(models.len());
    let mut val_scores = Vec::with_capacity(models.len());
    for (model_index, template) in models.iter().enumerate() {
        let template = resolve_moving_average(template, dataset);
        let fit_seed = derive_seed2(cycle_seed, experiment_index as u64, model_index as u64);
        test_scores.push(fit_and_score(
            &template, &train_x, &train_y, &test_x, &test.y, fit_seed,
        ));

        if options.representation_selection == RepresentationSelection::ValidationRmse {
            let n_train = train_x.len();
            let val_size = ((n_train as f64 * 0.2).round() as usize).clamp(1, n_train - 1);
            let core = n_train - val_size;
            val_scores.push(fit_and_score(
                &template,
                &train_x[..core],
                &train_y[..core],
                &train_x[core..],
                &train_y[core..],
                derive_seed(fit_seed, 1),
            ));
        } else {
            val_scores.push(None);
        }
    }
    Ok(ExperimentScores {
        test: test_scores,
        validation: val_scores,
    })
}

fn run_cycle(
    series: &DailySeries,
    models: &[Regressor],
    experiments: &[(Blend, Representation)],
    blends: &[Blend],
    options: &BenchOptions,
    cycle_index: usize,
) -> Result<CycleResult, BenchError> {
    let cycle_seed = derive_seed(options.seed, cycle_index as u64);
    let mut rng = rng_for(cycle_seed, 0);
    let n = series.len();

    // Draw the resample once per cycle, shared by every experiment.
    let (records, resample_train): (Vec<DailyRecord>, Option<Vec<usize>>) =
        match options.bootstrap_mode {
            BootstrapMode::SortedResample => {
                let mut resampled: Vec<DailyRecord> = (0..n)
                    .map(|_| series.records()[rng.gen_range(0..n)].clone())
                    .collect();
                resampled.sort_by_key(|r| r.date);
                (resampled, None)
            }
            BootstrapMode::ResampleTrainOnly => {
                let indices: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                (series.records().to_vec(), Some(indices))
            }
        };
    let gap_policy = match options.bootstrap_mode {
        BootstrapMode::SortedResample => GapPolicy::Positional,
        BootstrapMode::ResampleTrainOnly => GapPolicy::DropSpanning,
    };

    let mut outcomes = vec![Vec::with_capacity(experiments.len()); models.len()];
    let mut test_matrix: Vec<Vec<Option<f64>>> = vec![Vec::new(); models.len()];
    let mut val_matrix: Vec<Vec<Option<f64>>> = vec![Vec::new(); models.len()];
    for (experiment_index, &(blend, representation)) in experiments.iter().enumerate() {
        let dataset = build_windows_from_records(
            &records,
            blend,
            representation,
            options.window,
            gap_policy,
        )?;
        let scores = score_experiment(
            &dataset,
            representation,
            models,
            options,
            cycle_seed,
            experiment_index,
            resample_train.as_deref(),
        )?;
        for m in 0..models.len() {
            outcomes[m].push(match scores.test[m] {
                Some(rmse) => ExperimentOutcome::Completed { rmse },
                None => ExperimentOutcome::Failed,
            });
            test_matrix[m].push(scores.test[m]);
            val_matrix[m].push(scores.validation[m]);
        }
    }

    // Per-blend selection of the representation.
    let mut blend_scores = vec![vec![None; blends.len()]; models.len()];
    for (m, scores) in blend_scores.iter_mut().enumerate() {
        for (b, blend) in blends.iter().enumerate() {
            let candidates: Vec<usize> = experiments
                .iter()
                .enumerate()
                .filter(|(_, (bl, _))| bl == blend)
                .map(|(i, _)| i)
                .collect();
            scores[b] = match options.representation_selection {
                RepresentationSelection::TestRmse => candidates
                    .iter()
                    .filter_map(|&i| test_matrix[m][i])
                    .min_by(f64::total_cmp),
                RepresentationSelection::ValidationRmse => candidates
                    .iter()
                    .filter_map(|&i| val_matrix[m][i].map(|v| (v, i)))
                    .min_by(|a, b| a.0.total_cmp(&b.0))
                    .and_then(|(_, i)| test_matrix[m][i]),
            };
        }
    }

    Ok(CycleResult {
        cycle_index,
        outcomes,
        blend_scores,
    })
}

/// Runs the full bootstrap comparison. Deterministic given
/// `(series, models, options)`; cycles execute in parallel.
pub fn bootstrap_benchmark(
    series: &DailySeries,
    models: &[Regressor],
    options: &BenchOptions,
) -> Result<BenchmarkReport, BenchError> {
    if models.is_empty() {
        return Err(BenchError::Argument("no models supplied".into()));
    }
    if options.n_cycles == 0 {
        return Err(BenchError::Argument("n_cycles must be at least 1".into()));
    }
    if series.len() <= options.window + 2 {
        return Err(BenchError::Argument(format!(
            "series of {} days is too short to window and split",
            series.len()
        )));
    }
    let experiments = enumerate_experiments();
    let blends = Blend::all().to_vec();

    let cycles: Result<Vec<CycleResult>, BenchError> = (0..options.n_cycles)
        .into_par_iter()
        .map(|cycle_index| run_cycle(series, models, &experiments, &blends, options, cycle_index))
        .collect();
    let cycles = cycles?;

    let lag_only_index = blends
        .iter()
        .position(|b| *b == Blend::LAG_ONLY)
        .expect("lag-only blend is always enumerated");

    let mut summaries = Vec::with_capacity(models.len());
    let mut totals = OutcomeCounts {
        completed: 0,
        failed: 0,
        skipped: 0,
        total: options.n_cycles * models.len() * experiments.len(),
    };
    for (m, template) in models.iter().enumerate() {
        let mut completed = 0;
        let mut failed = 0;
        let mut skipped = 0;
        for cycle in &cycles {
            for outcome in &cycle.outcomes[m] {
                match outcome {
                    ExperimentOutcome::Completed { .. } => completed += 1,
                    ExperimentOutcome::Failed => failed += 1,
                    ExperimentOutcome::Skipped => skipped += 1,
                }
            }
        }
        totals.completed += completed;
        totals.failed += failed;
        totals.skipped += skipped;

        let no_additional: Vec<f64> = cycles
            .iter()
            .filter_map(|c| c.blend_scores[m][lag_only_index])
            .collect();
        let any_data: Vec<f64> = cycles
            .iter()
            .filter_map(|c| {
                c.blend_scores[m]
                    .iter()
                    .filter_map(|s| *s)
                    .min_by(f64::total_cmp)
            })
            .collect();

        // Best experiment by mean test RMSE over cycles.
        let mut best: Option<(f64, usize)> = None;
        for (e, _) in experiments.iter().enumerate() {
            let values: Vec<f64> = cycles
                .iter()
                .filter_map(|c| c.outcomes[m][e].rmse())
                .collect();
            if values.is_empty() {
                continue;
            }
            let mean = stats::mean(&values);
            if best.map_or(true, |(b, _)| mean < b) {
                best = Some((mean, e));
            }
        }
        let (best_blend, best_representation) = match best {
            Some((_, e)) => (
                experiments[e].0.label(),
                experiments[e].1.label().to_string(),
            ),
            None => ("none".to_string(), "none".to_string()),
        };

        summaries.push(ModelSummary {
            model: template.kind(),
            no_additional: DistributionSummary::from_values(no_additional),
            any_data: DistributionSummary::from_values(any_data),
            best_blend,
            best_representation,
            group_deltas: model_group_deltas(&cycles, &blends, m),
            completed,
            failed,
            skipped,
        });
    }

    Ok(BenchmarkReport {
        options: options.clone(),
        models: models.iter().map(|t| t.kind()).collect(),
        experiments: experiments
            .iter()
            .map(|&(blend, representation)| ExperimentSpec {
                blend,
                blend_label: blend.label(),
                representation,
            })
            .collect(),
        blends: blends.iter().map(|b| b.label()).collect(),
        cycles,
        summaries,
        not_implemented: NOT_IMPLEMENTED_MODELS
            .iter()
            .map(|s| s.to_string())
            .collect(),
        counts: totals,
    })
}

/// Per-cycle delta for one model and group: best score among blends
/// containing the group minus best among blends without it.
fn cycle_group_delta(
    cycle: &CycleResult,
    blends: &[Blend],
    model_index: usize,
    group: CovariateGroup,
) -> Option<f64> {
    let best = |want: bool| -> Option<f64> {
        blends
            .iter()
            .enumerate()
            .filter(|(_, b)| b.contains_group(group) == want)
            .filter_map(|(i, _)| cycle.blend_scores[model_index][i])
            .min_by(f64::total_cmp)
    };
    Some(best(true)? - best(false)?)
}

fn model_group_deltas(cycles: &[CycleResult], blends: &[Blend], model_index: usize) -> GroupDeltas {
    let mean_delta = |group: CovariateGroup| {
        let deltas: Vec<f64> = cycles
            .iter()
            .filter_map(|c| cycle_group_delta(c, blends, model_index, group))
            .collect();
        stats::mean(&deltas)
    };
    GroupDeltas {
        dow: mean_delta(CovariateGroup::DayOfWeek),
        season: mean_delta(CovariateGroup::Season),
        weather: mean_delta(CovariateGroup::Weather),
    }
}

/// Mean RMSE change per covariate group, averaged over cycles and models:
/// negative values mean requiring the group lowers the best achievable
/// error.
pub fn group_improvement(report: &BenchmarkReport) -> GroupDeltas {
    let blends: Vec<Blend> = Blend::all().to_vec();
    let mean_over_all = |group: CovariateGroup| {
        let mut deltas = Vec::new();
        for cycle in &report.cycles {
            for m in 0..report.models.len() {
                if let Some(d) = cycle_group_delta(cycle, &blends, m, group) {
                    deltas.push(d);
                }
            }
        }
        stats::mean(&deltas)
    };
    GroupDeltas {
        dow: mean_over_all(CovariateGroup::DayOfWeek),
        season: mean_over_all(CovariateGroup::Season),
        weather: mean_over_all(CovariateGroup::Weather),
    }
}

/// Permutation feature importance on held-out data: mean RMSE increase
/// over `n_repeats` shuffles of each column, sorted most-important first
/// (ties keep feature order).
pub fn permutation_importance(
    model: &Regressor,
    x_test: &[Vec<f64>],
    y_test: &[f64],
    feature_names: &[String],
    n_repeats: usize,
    seed: u64,
) -> Result<Vec<(String, f64)>, BenchError> {
    if n_repeats == 0 {
        return Err(BenchError::Argument("n_repeats must be at least 1".into()));
    }
    if x_test.is_empty() || x_test[0].len() != feature_names.len() {
        return Err(BenchError::Argument(
            "test matrix and feature names disagree".into(),
        ));
    }
    let baseline = rmse(&model.predict(x_test)?, y_test)?;
    let n = x_test.len();

    let mut deltas: Vec<(String, f64)> = Vec::with_capacity(feature_names.len());
    for (j, name) in feature_names.iter().enumerate() {
        let mut total = 0.0;
        for repeat in 0..n_repeats {
            let mut rng = rng_for(derive_seed2(seed, j as u64, repeat as u64), 0);
            // Fisher-Yates permutation of column j only.
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let k = rng.gen_range(0..=i);
                perm.swap(i, k);
            }
            let mut shuffled = x_test.to_vec();
            for (i, &src) in perm.iter().enumerate() {
                shuffled[i][j] = x_test[src][j];
            }
            total += rmse(&model.predict(&shuffled)?, y_test)? - baseline;
        }
        deltas.push((name.clone(), total / n_repeats as f64));
    }
    deltas.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ok(deltas)
}

impl BenchmarkReport {
    /// Per-model bar-chart data: headline means with 95% CIs, plus
    /// explicit rows for the unimplemented architectures.
    pub fn to_model_csv(&self) -> String {
        let mut out = String::from(
            "model,status,no_additional_mean,no_additional_ci_low,no_additional_ci_high,\
             any_data_mean,any_data_ci_low,any_data_ci_high\n",
        );
        for s in &self.summaries {
            let fmt = |d: &Option<DistributionSummary>| match d {
                Some(d) => format!("{},{},{}", d.mean, d.ci95_low, d.ci95_high),
                None => ",,".to_string(),
            };
            out.push_str(&format!(
                "{},ok,{},{}\n",
                s.model,
                fmt(&s.no_additional),
                fmt(&s.any_data)
            ));
        }
        for name in &self.not_implemented {
            out.push_str(&format!("{name},not_implemented,,,,,,\n"));
        }
        out
    }

    /// Per-model, per-group improvement deltas (negative = improvement).
    pub fn to_group_csv(&self) -> String {
        let mut out = String::from("model,group,mean_delta_rmse\n");
        for s in &self.summaries {
            out.push_str(&format!("{},dow,{}\n", s.model, s.group_deltas.dow));
            out.push_str(&format!("{},season,{}\n", s.model, s.group_deltas.season));
            out.push_str(&format!("{},weather,{}\n", s.model, s.group_deltas.weather));
        }
        let overall = group_improvement(self);
        out.push_str(&format!("all,dow,{}\n", overall.dow));
        out.push_str(&format!("all,season,{}\n", overall.season));
        out.push_str(&format!("all,weather,{}\n", overall.weather));
        out
    }
}
