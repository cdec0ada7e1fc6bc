//! CSV ingestion and emission.
//!
//! Daily CSVs need a header row; dates are ISO-8601 (`YYYY-MM-DD`) and
//! decimals use '.'. Event CSVs carry one `YYYY-MM-DDTHH:MM:SS`
//! timestamp per row in their first column.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::date::Instant;
use super::series::{DailyRecord, DailySeries, EventSeries};
use super::DataError;

/// Maps the canonical field names onto the column names of a concrete
/// file. Defaults to the canonical layout used by [`write_daily_csv`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnSchema {
    pub date: String,
    pub target: String,
    pub pressure: String,
    pub wind_speed: String,
    pub avg_temp: String,
    pub precipitation: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        ColumnSchema {
            date: "date".into(),
            target: "target".into(),
            pressure: "pressure".into(),
            wind_speed: "wind_speed".into(),
            avg_temp: "avg_temp".into(),
            precipitation: "precipitation".into(),
        }
    }
}

impl ColumnSchema {
    fn columns(&self) -> [(&'static str, &str); 6] {
        [
            ("date", &self.date),
            ("target", &self.target),
            ("pressure", &self.pressure),
            ("wind_speed", &self.wind_speed),
            ("avg_temp", &self.avg_temp),
            ("precipitation", &self.precipitation),
        ]
    }
}

fn io_err(path: &Path, source: std::io::Error) -> DataError {
    DataError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> DataError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io_err(path, io),
        other => DataError::Argument(format!("{}: malformed csv: {other:?}", path.display())),
    }
}

/// Reads a daily-aggregate CSV under `schema`, derives calendar fields,
/// and returns the records sorted by date.
pub fn parse_daily_csv(path: &Path, schema: &ColumnSchema) -> Result<DailySeries, DataError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();

    let index_of = |canonical: &'static str, name: &str| -> Result<usize, DataError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn {
                column: format!("{name} (mapped from {canonical})"),
                path: path.display().to_string(),
            })
    };
    let cols = schema.columns();
    let mut idx = [0usize; 6];
    for (slot, (canonical, name)) in idx.iter_mut().zip(cols.iter()) {
        *slot = index_of(canonical, name)?;
    }
    let [date_i, target_i, pressure_i, wind_i, temp_i, precip_i] = idx;

    let mut records = Vec::new();
    for (row_idx, row) in reader.records().enumerate() {
        let line = row_idx + 2; // 1-based, after the header
        let row = row.map_err(|e| csv_err(path, e))?;
        let cell = |i: usize, column: &str| -> Result<&str, DataError> {
            row.get(i).ok_or_else(|| DataError::BadCell {
                path: path.display().to_string(),
                line,
                column: column.to_string(),
                value: "<missing>".to_string(),
            })
        };
        let parse_f64 = |i: usize, column: &str| -> Result<f64, DataError> {
            let raw = cell(i, column)?;
            raw.trim().parse::<f64>().map_err(|_| DataError::BadCell {
                path: path.display().to_string(),
                line,
                column: column.to_string(),
                value: raw.to_string(),
            })
        };

        let raw_date = cell(date_i, &schema.date)?;
        let date = raw_date
            .trim()
            .parse()
            .map_err(|_| DataError::BadCell {
                path: path.display().to_string(),
                line,
                column: schema.date.clone(),
                value: raw_date.to_string(),
            })?;
        let record = DailyRecord::new(
            date,
            parse_f64(target_i, &schema.target)?,
            parse_f64(pressure_i, &schema.pressure)?,
            parse_f64(wind_i, &schema.wind_speed)?,
            parse_f64(temp_i, &schema.avg_temp)?,
            parse_f64(precip_i, &schema.precipitation)?,
        )?;
        records.push(record);
    }

    records.sort_by_key(|r| r.date);
    let mut seen = BTreeSet::new();
    for r in &records {
        if !seen.insert(r.date) {
            return Err(DataError::DuplicateDate {
                date: r.date,
                path: path.display().to_string(),
            });
        }
    }
    DailySeries::new(records)
}

/// Writes a series in the canonical column layout (the
/// [`ColumnSchema::default`] names). Floats use Rust's shortest
/// round-trip formatting, so clean parse/write cycles are bit-exact.
pub fn write_daily_csv(series: &DailySeries, path: &Path) -> Result<(), DataError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
    writer
        .write_record([
            "date",
            "target",
            "pressure",
            "wind_speed",
            "avg_temp",
            "precipitation",
        ])
        .map_err(|e| csv_err(path, e))?;
    for r in series.records() {
        writer
            .write_record([
                r.date.to_string(),
                r.target.to_string(),
                r.pressure.to_string(),
                r.wind_speed.to_string(),
                r.avg_temp.to_string(),
                r.precipitation.to_string(),
            ])
            .map_err(|e| csv_err(path, e))?;
    }
    writer.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

/// Reads an event-timestamp CSV and converts to hours since `origin`.
///
/// Rows are sorted; identical timestamps are tie-jittered in arrival
/// order (see [`super::TIE_JITTER_HOURS`]). The horizon is the later of
/// the last event and `end`, when given.
pub fn parse_event_csv(
    path: &Path,
    origin: &Instant,
    end: Option<&Instant>,
) -> Result<EventSeries, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;

    let mut times = Vec::new();
    for (row_idx, row) in reader.records().enumerate() {
        let line = row_idx + 1;
        let row = row.map_err(|e| csv_err(path, e))?;
        let raw = row.get(0).unwrap_or("").trim();
        if raw.is_empty() {
            continue;
        }
        // Tolerate a header row naming the column.
        if row_idx == 0 && raw.parse::<Instant>().is_err() && raw.chars().any(|c| c.is_alphabetic())
        {
            continue;
        }
        let stamp: Instant = raw.parse().map_err(|_| DataError::BadCell {
            path: path.display().to_string(),
            line,
            column: "timestamp".to_string(),
            value: raw.to_string(),
        })?;
        let hours = stamp.hours_since(origin);
        if hours < 0.0 {
            return Err(DataError::EventBeforeOrigin { hours });
        }
        times.push(hours);
    }
    if times.is_empty() {
        return Err(DataError::EmptyEventSeries(path.display().to_string()));
    }
    let configured_end = end.map(|e| e.hours_since(origin)).unwrap_or(0.0);
    EventSeries::from_unsorted(times, configured_end)
}
