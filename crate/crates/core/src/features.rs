//! Sliding-window design matrices under covariate blends and data
//! representations.
//!
//! Every row predicts day `d` from the preceding `window` days. The
//! lagged target is always present; day-of-week, season, and weather
//! columns join per the blend. Categorical columns appear either as
//! numeric codes or as full one-hot indicator blocks (no reference level
//! dropped), and the scaled representations standardize columns with
//! statistics fitted on training rows only.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{CivilDate, DailySeries, Season};

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("{0}")]
    Argument(String),
}

/// Which of the three optional covariate groups join the lagged target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Blend {
    pub use_dow: bool,
    pub use_season: bool,
    pub use_weather: bool,
}

impl Blend {
    pub const LAG_ONLY: Blend = Blend {
        use_dow: false,
        use_season: false,
        use_weather: false,
    };

    /// All 8 combinations, lag-only first, in a fixed documented order.
    pub fn all() -> [Blend; 8] {
        let mut out = [Blend::LAG_ONLY; 8];
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = Blend {
                use_dow: i & 0b100 != 0,
                use_season: i & 0b010 != 0,
                use_weather: i & 0b001 != 0,
            };
        }
        out
    }

    /// True when the blend contains a categorical group, making one-hot
    /// encodings meaningful.
    pub fn has_categorical(&self) -> bool {
        self.use_dow || self.use_season
    }

    pub fn contains_group(&self, group: CovariateGroup) -> bool {
        match group {
            CovariateGroup::DayOfWeek => self.use_dow,
            CovariateGroup::Season => self.use_season,
            CovariateGroup::Weather => self.use_weather,
        }
    }

    /// Short stable label, e.g. `lag_only` or `dow+weather`.
    pub fn label(&self) -> String {
        if !self.use_dow && !self.use_season && !self.use_weather {
            return "lag_only".to_string();
        }
        let mut parts = Vec::new();
        if self.use_dow {
            parts.push("dow");
        }
        if self.use_season {
            parts.push("season");
        }
        if self.use_weather {
            parts.push("weather");
        }
        parts.join("+")
    }
}

/// The three optional covariate groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateGroup {
    DayOfWeek,
    Season,
    Weather,
}

impl CovariateGroup {
    pub const ALL: [CovariateGroup; 3] = [
        CovariateGroup::DayOfWeek,
        CovariateGroup::Season,
        CovariateGroup::Weather,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CovariateGroup::DayOfWeek => "dow",
            CovariateGroup::Season => "season",
            CovariateGroup::Weather => "weather",
        }
    }
}

/// How the matrix is encoded/preprocessed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Raw,
    Scaled,
    Onehot,
    ScaledOnehot,
}

impl Representation {
    pub const ALL: [Representation; 4] = [
        Representation::Raw,
        Representation::Scaled,
        Representation::Onehot,
        Representation::ScaledOnehot,
    ];

    /// Categorical columns expand to indicator blocks.
    pub fn one_hot(&self) -> bool {
        matches!(self, Representation::Onehot | Representation::ScaledOnehot)
    }

    /// Columns are standardized with training statistics before fitting.
    pub fn scaled(&self) -> bool {
        matches!(self, Representation::Scaled | Representation::ScaledOnehot)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Representation::Raw => "raw",
            Representation::Scaled => "scaled",
            Representation::Onehot => "onehot",
            Representation::ScaledOnehot => "scaled_onehot",
        }
    }
}

/// Whether windows may span calendar gaps. Real series drop gap-spanning
/// windows; bootstrap resamples (duplicated/missing dates by design) are
/// windowed purely by position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapPolicy {
    DropSpanning,
    Positional,
}

/// Default sliding-window length in days.
pub const DEFAULT_WINDOW: usize = 5;

/// Flattened design matrix with next-day targets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowedDataset {
    /// Row-major feature matrix; no NaNs.
    pub x: Vec<Vec<f64>>,
    /// Target of the predicted day per row.
    pub y: Vec<f64>,
    /// Date of the predicted day per row.
    pub row_dates: Vec<CivilDate>,
    /// Unique, ordered column names (`<variable>_lag<k>`).
    pub feature_names: Vec<String>,
    /// Windows discarded for spanning date gaps.
    pub dropped_windows: usize,
}

impl WindowedDataset {
    pub fn n_rows(&self) -> usize {
        self.x.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Column indices of the lagged-target features.
    pub fn target_lag_columns(&self) -> Vec<usize> {
        self.feature_names
            .iter()
            .enumerate()
            .filter_map(|(i, name)| name.starts_with("target_lag").then_some(i))
            .collect()
    }
}

/// Builds the design matrix with the default gap policy (drop windows
/// spanning calendar gaps, counting them in `dropped_windows`).
pub fn build_windows(
    series: &DailySeries,
    blend: Blend,
    representation: Representation,
    window: usize,
) -> Result<WindowedDataset, FeatureError> {
    build_windows_with_policy(series, blend, representation, window, GapPolicy::DropSpanning)
}

/// [`build_windows`] with an explicit gap policy.
pub fn build_windows_with_policy(
    series: &DailySeries,
    blend: Blend,
    representation: Representation,
    window: usize,
    gap_policy: GapPolicy,
) -> Result<WindowedDataset, FeatureError> {
    build_windows_from_records(series.records(), blend, representation, window, gap_policy)
}

/// Windowing over a bare record sequence. Bootstrap resamples carry
/// duplicate and missing dates by construction, so they cannot form a
/// [`DailySeries`]; they window positionally instead.
pub fn build_windows_from_records(
    records: &[crate::data::DailyRecord],
    blend: Blend,
    representation: Representation,
    window: usize,
    gap_policy: GapPolicy,
) -> Result<WindowedDataset, FeatureError> {
    if window == 0 {
        return Err(FeatureError::Argument("window must be at least 1".into()));
    }
    if records.len() <= window {
        return Err(FeatureError::Argument(format!(
            "series of {} days is too short for a {window}-day window",
            records.len()
        )));
    }
    let one_hot = representation.one_hot();

    // Column names, oldest lag first; lag k means "k days before the
    // predicted day".
    let mut feature_names = Vec::new();
    for offset in 0..window {
        let lag = window - offset;
        feature_names.push(format!("target_lag{lag}"));
        if blend.use_dow {
            if one_hot {
                for d in 0..7 {
                    feature_names.push(format!("dow{d}_lag{lag}"));
                }
            } else {
                feature_names.push(format!("dow_lag{lag}"));
            }
        }
        if blend.use_season {
            if one_hot {
                for season in Season::ALL {
                    feature_names.push(format!("season_{}_lag{lag}", season.name()));
                }
            } else {
                feature_names.push(format!("season_lag{lag}"));
            }
        }
        if blend.use_weather {
            for name in ["pressure", "wind_speed", "avg_temp", "precipitation"] {
                feature_names.push(format!("{name}_lag{lag}"));
            }
        }
    }

    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut row_dates = Vec::new();
    let mut dropped = 0usize;
    for target_idx in window..records.len() {
        if gap_policy == GapPolicy::DropSpanning {
            let contiguous = (target_idx - window..target_idx).all(|j| {
                records[j + 1].date.days_since(&records[j].date) == 1
            });
            if !contiguous {
                dropped += 1;
                continue;
            }
        }
        let mut row = Vec::with_capacity(feature_names.len());
        for j in target_idx - window..target_idx {
            let r = &records[j];
            row.push(r.target);
            if blend.use_dow {
                if one_hot {
                    for d in 0..7u8 {
                        row.push(if r.day_of_week == d { 1.0 } else { 0.0 });
                    }
                } else {
                    row.push(r.day_of_week as f64);
                }
            }
            if blend.use_season {
                if one_hot {
                    for season in Season::ALL {
                        row.push(if r.season == season { 1.0 } else { 0.0 });
                    }
                } else {
                    row.push(r.season.index() as f64);
                }
            }
            if blend.use_weather {
                row.extend([r.pressure, r.wind_speed, r.avg_temp, r.precipitation]);
            }
        }
        debug_assert_eq!(row.len(), feature_names.len());
        x.push(row);
        y.push(records[target_idx].target);
        row_dates.push(records[target_idx].date);
    }

    Ok(WindowedDataset {
        x,
        y,
        row_dates,
        feature_names,
        dropped_windows: dropped,
    })
}

/// Per-column z-score standardization fitted on training rows.
/// Zero-variance columns pass through unchanged.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scaler {
    mean: Vec<f64>,
    /// Population standard deviation; 0 marks a pass-through column.
    sd: Vec<f64>,
}

pub fn fit_scaler(x_train: &[Vec<f64>]) -> Result<Scaler, FeatureError> {
    if x_train.is_empty() {
        return Err(FeatureError::Argument("cannot fit scaler on no rows".into()));
    }
    let n = x_train.len() as f64;
    let p = x_train[0].len();
    let mut mean = vec![0.0; p];
    for row in x_train {
        for (m, v) in mean.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    let mut var = vec![0.0; p];
    for row in x_train {
        for ((v, &x), &m) in var.iter_mut().zip(row.iter()).zip(mean.iter()) {
            *v += (x - m) * (x - m);
        }
    }
    let sd = var.into_iter().map(|v| (v / n).sqrt()).collect();
    Ok(Scaler { mean, sd })
}

pub fn apply_scaler(scaler: &Scaler, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    x.iter()
        .map(|row| {
            row.iter()
                .zip(scaler.mean.iter().zip(scaler.sd.iter()))
                .map(|(&v, (&m, &s))| if s > 0.0 { (v - m) / s } else { v })
                .collect()
        })
        .collect()
}

/// All distinct (blend, representation) experiments: blends with a
/// categorical group take all four representations; the two purely
/// numeric blends (lag-only and weather-only) collapse one-hot variants
/// onto raw/scaled, leaving 6*4 + 2*2 = 28 pairs.
pub fn enumerate_experiments() -> Vec<(Blend, Representation)> {
    let mut out = Vec::with_capacity(28);
    for blend in Blend::all() {
        for representation in Representation::ALL {
            if representation.one_hot() && !blend.has_categorical() {
                continue;
            }
            out.push((blend, representation));
        }
    }
    out
}
