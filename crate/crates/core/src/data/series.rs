//! Daily-aggregate series and continuous-time event series.

use serde::{Deserialize, Serialize};

use super::date::{CivilDate, Season};
use super::DataError;

/// One calendar day: target value plus weather and derived calendar fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyRecord {
    pub date: CivilDate,
    /// Daily event count (delays or gated entries); non-negative.
    pub target: f64,
    /// Station pressure, hPa.
    pub pressure: f64,
    /// Wind speed, km/h.
    pub wind_speed: f64,
    /// Average temperature, degrees C.
    pub avg_temp: f64,
    /// Precipitation, mm.
    pub precipitation: f64,
    /// Monday = 0 .. Sunday = 6; always derived from `date`.
    pub day_of_week: u8,
    /// Meteorological season; always derived from `date`.
    pub season: Season,
}

impl DailyRecord {
    /// Builds a record, deriving `day_of_week` and `season` from the date.
    pub fn new(
        date: CivilDate,
        target: f64,
        pressure: f64,
        wind_speed: f64,
        avg_temp: f64,
        precipitation: f64,
    ) -> Result<Self, DataError> {
        if !target.is_finite() || target < 0.0 {
            return Err(DataError::Argument(format!(
                "target must be finite and non-negative, got {target} on {date}"
            )));
        }
        Ok(DailyRecord {
            date,
            target,
            pressure,
            wind_speed,
            avg_temp,
            precipitation,
            day_of_week: date.day_of_week(),
            season: date.season(),
        })
    }
}

/// A gap between consecutive records: `days` is the calendar distance
/// (contiguous days have distance 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapReport {
    pub before: CivilDate,
    pub after: CivilDate,
    pub days: i64,
}

/// Chronologically ordered daily records. Dates are strictly increasing;
/// gaps are allowed but reportable via [`DailySeries::gaps`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailySeries {
    records: Vec<DailyRecord>,
}

impl DailySeries {
    pub fn new(records: Vec<DailyRecord>) -> Result<Self, DataError> {
        for (i, pair) in records.windows(2).enumerate() {
            if pair[1].date <= pair[0].date {
                return Err(DataError::NonIncreasingDates { index: i + 1 });
            }
        }
        Ok(DailySeries { records })
    }

    pub fn records(&self) -> &[DailyRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.target).collect()
    }

    /// All gaps wider than one calendar day.
    pub fn gaps(&self) -> Vec<GapReport> {
        self.records
            .windows(2)
            .filter_map(|pair| {
                let days = pair[1].date.days_since(&pair[0].date);
                (days > 1).then_some(GapReport {
                    before: pair[0].date,
                    after: pair[1].date,
                    days,
                })
            })
            .collect()
    }

    /// True when every consecutive pair of dates is exactly one day apart.
    pub fn is_contiguous(&self) -> bool {
        self.gaps().is_empty()
    }
}

/// Spacing inserted between identical event timestamps, in hours.
/// Time-rescaling diagnostics require strictly positive gaps; shifting
/// ties by 1e-6 h (3.6 ms) preserves counts with negligible effect on
/// the likelihood.
pub const TIE_JITTER_HOURS: f64 = 1e-6;

/// Sorted event timestamps in hours from a fixed origin, plus the
/// observation horizon. Times are strictly increasing and lie in
/// `[0, horizon]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventSeries {
    times: Vec<f64>,
    horizon: f64,
}

impl EventSeries {
    /// Validating constructor: requires strictly increasing finite times
    /// within `[0, horizon]`.
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self, DataError> {
        if !horizon.is_finite() || horizon < 0.0 {
            return Err(DataError::InvalidEventSeries(format!(
                "horizon must be finite and non-negative, got {horizon}"
            )));
        }
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t < 0.0 || t > horizon {
                return Err(DataError::InvalidEventSeries(format!(
                    "time {t} at index {i} outside [0, {horizon}]"
                )));
            }
            if i > 0 && t <= times[i - 1] {
                return Err(DataError::InvalidEventSeries(format!(
                    "times not strictly increasing at index {i}"
                )));
            }
        }
        Ok(EventSeries { times, horizon })
    }

    /// Builds a series from possibly unsorted times, resolving ties: a
    /// stable sort preserves arrival order, then any time not strictly
    /// after its predecessor is shifted to `prev + TIE_JITTER_HOURS`.
    /// The horizon grows if jitter pushes the last event past it.
    pub fn from_unsorted(mut times: Vec<f64>, horizon: f64) -> Result<Self, DataError> {
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(DataError::InvalidEventSeries(format!(
                    "time {t} at index {i} is negative or non-finite"
                )));
            }
        }
        times.sort_by(f64::total_cmp);
        for i in 1..times.len() {
            if times[i] <= times[i - 1] {
                times[i] = times[i - 1] + TIE_JITTER_HOURS;
            }
        }
        let horizon = match times.last() {
            Some(&last) => horizon.max(last),
            None => horizon,
        };
        Self::new(times, horizon)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<f64> {
        self.times.last().copied()
    }

    /// Sub-series of events strictly before `t`, keeping the horizon.
    pub fn before(&self, t: f64) -> EventSeries {
        let cut = self.times.partition_point(|&x| x < t);
        EventSeries {
            times: self.times[..cut].to_vec(),
            horizon: self.horizon,
        }
    }

    /// Number of events at or before `t`.
    pub fn count_at(&self, t: f64) -> usize {
        self.times.partition_point(|&x| x <= t)
    }
}
