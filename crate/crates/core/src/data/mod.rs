//! Domain types and ingestion for daily-aggregate and event-timestamp data.

mod csv_io;
mod date;
mod series;
mod synth;

pub use csv_io::{parse_daily_csv, parse_event_csv, write_daily_csv, ColumnSchema};
pub use date::{derive_calendar, CivilDate, Instant, Season};
pub use series::{DailyRecord, DailySeries, EventSeries, GapReport, TIE_JITTER_HOURS};
pub use synth::{synth_daily, SynthConfig};

use thiserror::Error;

/// Errors produced while constructing or ingesting datasets.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid calendar date {year:04}-{month:02}-{day:02}")]
    InvalidDate { year: i32, month: u32, day: u32 },
    #[error("unparseable date {0:?} (expected YYYY-MM-DD)")]
    UnparseableDate(String),
    #[error("unparseable timestamp {0:?} (expected YYYY-MM-DDTHH:MM:SS)")]
    UnparseableTimestamp(String),
    #[error("missing column {column:?} in {path}")]
    MissingColumn { column: String, path: String },
    #[error("{path}:{line}: cannot parse field {column:?}: {value:?}")]
    BadCell {
        path: String,
        line: usize,
        column: String,
        value: String,
    },
    #[error("duplicate date {date} in {path}")]
    DuplicateDate { date: CivilDate, path: String },
    #[error("dates not strictly increasing at index {index}")]
    NonIncreasingDates { index: usize },
    #[error("event at {hours} h precedes the origin")]
    EventBeforeOrigin { hours: f64 },
    #[error("event series is empty: {0}")]
    EmptyEventSeries(String),
    #[error("event times violate the series invariant: {0}")]
    InvalidEventSeries(String),
    #[error("{0}")]
    Argument(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
