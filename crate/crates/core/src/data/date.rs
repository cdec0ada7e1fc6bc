//! Proleptic Gregorian calendar dates and derived calendar fields.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DataError;

/// A calendar date (proleptic Gregorian), totally ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CivilDate {
    year: i32,
    month: u8,
    day: u8,
}

/// Meteorological season: Dec-Feb winter, Mar-May spring, Jun-Aug summer,
/// Sep-Nov fall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Season {
    Winter,
    Spring,
    Summer,
    Fall,
}

impl Season {
    /// Stable index used for numeric encodings: winter=0 .. fall=3.
    pub fn index(self) -> usize {
        match self {
            Season::Winter => 0,
            Season::Spring => 1,
            Season::Summer => 2,
            Season::Fall => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Season::Winter => "winter",
            Season::Spring => "spring",
            Season::Summer => "summer",
            Season::Fall => "fall",
        }
    }

    pub const ALL: [Season; 4] = [Season::Winter, Season::Spring, Season::Summer, Season::Fall];
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const DAYS_IN_MONTH: [u8; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

fn is_leap(year: i32) -> bool {
    (year % 4 == 0 && year % 100 != 0) || year % 400 == 0
}

fn days_in_month(year: i32, month: u8) -> u8 {
    if month == 2 && is_leap(year) {
        29
    } else {
        DAYS_IN_MONTH[(month - 1) as usize]
    }
}

impl CivilDate {
    /// Validated constructor.
    pub fn new(year: i32, month: u32, day: u32) -> Result<Self, DataError> {
        if !(1..=12).contains(&month) || day < 1 || day > days_in_month(year, month as u8) as u32 {
            return Err(DataError::InvalidDate {
                year,
                month,
                day,
            });
        }
        Ok(CivilDate {
            year,
            month: month as u8,
            day: day as u8,
        })
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u32 {
        self.month as u32
    }

    pub fn day(&self) -> u32 {
        self.day as u32
    }

    /// Days since 1970-01-01 (negative before). Howard Hinnant's civil
    /// calendar algorithm; exact over the full proleptic range used here.
    pub fn to_epoch_days(&self) -> i64 {
        let y = if self.month <= 2 {
            self.year as i64 - 1
        } else {
            self.year as i64
        };
        let era = if y >= 0 { y } else { y - 399 } / 400;
        let yoe = y - era * 400; // [0, 399]
        let m = self.month as i64;
        let d = self.day as i64;
        let doy = (153 * (if m > 2 { m - 3 } else { m + 9 }) + 2) / 5 + d - 1; // [0, 365]
        let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy; // [0, 146096]
        era * 146097 + doe - 719468
    }

    /// Inverse of [`CivilDate::to_epoch_days`].
    pub fn from_epoch_days(days: i64) -> Self {
        let z = days + 719468;
        let era = if z >= 0 { z } else { z - 146096 } / 146097;
        let doe = z - era * 146097; // [0, 146096]
        let yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365; // [0, 399]
        let y = yoe + era * 400;
        let doy = doe - (365 * yoe + yoe / 4 - yoe / 100); // [0, 365]
        let mp = (5 * doy + 2) / 153; // [0, 11]
        let d = doy - (153 * mp + 2) / 5 + 1; // [1, 31]
        let m = if mp < 10 { mp + 3 } else { mp - 9 }; // [1, 12]
        CivilDate {
            year: (if m <= 2 { y + 1 } else { y }) as i32,
            month: m as u8,
            day: d as u8,
        }
    }

    /// Day of week with Monday = 0 .. Sunday = 6.
    pub fn day_of_week(&self) -> u8 {
        // 1970-01-01 was a Thursday (index 3).
        (self.to_epoch_days() + 3).rem_euclid(7) as u8
    }

    /// Meteorological season of this date's month.
    pub fn season(&self) -> Season {
        match self.month {
            12 | 1 | 2 => Season::Winter,
            3 | 4 | 5 => Season::Spring,
            6 | 7 | 8 => Season::Summer,
            _ => Season::Fall,
        }
    }

    /// The date `n` days after this one (`n` may be negative).
    pub fn plus_days(&self, n: i64) -> Self {
        Self::from_epoch_days(self.to_epoch_days() + n)
    }

    /// Signed day count `self - other`.
    pub fn days_since(&self, other: &CivilDate) -> i64 {
        self.to_epoch_days() - other.to_epoch_days()
    }
}

/// Calendar covariates for a date: `(day_of_week, season)` with Monday = 0.
pub fn derive_calendar(date: CivilDate) -> (u8, Season) {
    (date.day_of_week(), date.season())
}

impl fmt::Display for CivilDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

impl FromStr for CivilDate {
    type Err = DataError;

    /// Parses `YYYY-MM-DD`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || DataError::UnparseableDate(s.to_string());
        let mut parts = s.splitn(3, '-');
        // A leading '-' (negative year) is not expected in transit data.
        let year: i32 = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
        let month: u32 = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
        let day: u32 = parts.next().ok_or_else(err)?.parse().map_err(|_| err())?;
        CivilDate::new(year, month, day).map_err(|_| err())
    }
}

impl Serialize for CivilDate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CivilDate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A date plus a time of day, used as the origin/end of event timelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Instant {
    pub date: CivilDate,
    pub hour: u8,
    pub minute: u8,
    pub second: u8,
}

impl Instant {
    pub fn new(date: CivilDate, hour: u32, minute: u32, second: u32) -> Result<Self, DataError> {
        if hour > 23 || minute > 59 || second > 59 {
            return Err(DataError::UnparseableTimestamp(format!(
                "{date}T{hour:02}:{minute:02}:{second:02}"
            )));
        }
        Ok(Instant {
            date,
            hour: hour as u8,
            minute: minute as u8,
            second: second as u8,
        })
    }

    pub fn midnight(date: CivilDate) -> Self {
        Instant {
            date,
            hour: 0,
            minute: 0,
            second: 0,
        }
    }

    /// Hours elapsed since `origin` (negative if before).
    pub fn hours_since(&self, origin: &Instant) -> f64 {
        let day_delta = self.date.days_since(&origin.date) as f64;
        let self_secs = self.hour as f64 * 3600.0 + self.minute as f64 * 60.0 + self.second as f64;
        let origin_secs =
            origin.hour as f64 * 3600.0 + origin.minute as f64 * 60.0 + origin.second as f64;
        day_delta * 24.0 + (self_secs - origin_secs) / 3600.0
    }
}

impl fmt::Display for Instant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}T{:02}:{:02}:{:02}",
            self.date, self.hour, self.minute, self.second
        )
    }
}

impl FromStr for Instant {
    type Err = DataError;

    /// Parses `YYYY-MM-DDTHH:MM:SS`; a bare `YYYY-MM-DD` means midnight.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('T') {
            None => Ok(Instant::midnight(s.parse()?)),
            Some((date_part, time_part)) => {
                let err = || DataError::UnparseableTimestamp(s.to_string());
                let date: CivilDate = date_part.parse().map_err(|_| err())?;
                let mut hms = time_part.splitn(3, ':');
                let hour: u32 = hms.next().ok_or_else(err)?.parse().map_err(|_| err())?;
                let minute: u32 = hms.next().ok_or_else(err)?.parse().map_err(|_| err())?;
                let second: u32 = hms.next().ok_or_else(err)?.parse().map_err(|_| err())?;
                Instant::new(date, hour, minute, second).map_err(|_| err())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epoch_roundtrip_is_identity() {
        // Covers leap years, century rules, and month boundaries.
        for days in (-200_000..200_000).step_by(997) {
            let d = CivilDate::from_epoch_days(days);
            assert_eq!(d.to_epoch_days(), days);
        }
    }

    #[test]
    fn known_weekdays_and_seasons() {
        // Frozen against a published perpetual calendar.
        let cases = [
            ((2019, 1, 1), 1, Season::Winter),  // Tuesday
            ((2020, 6, 15), 0, Season::Summer), // Monday
            ((2023, 12, 1), 4, Season::Winter), // Friday
            ((1970, 1, 1), 3, Season::Winter),  // Thursday
            ((2000, 2, 29), 1, Season::Winter), // Tuesday (leap century)
            ((2023, 7, 29), 5, Season::Summer), // Saturday
            ((2014, 9, 1), 0, Season::Fall),    // Monday
        ];
        for ((y, m, d), dow, season) in cases {
            let date = CivilDate::new(y, m, d).unwrap();
            assert_eq!(derive_calendar(date), (dow, season), "{date}");
        }
    }

    #[test]
    fn rejects_invalid_dates() {
        assert!(CivilDate::new(2019, 2, 29).is_err());
        assert!(CivilDate::new(2019, 13, 1).is_err());
        assert!(CivilDate::new(2019, 0, 1).is_err());
        assert!(CivilDate::new(2020, 2, 29).is_ok());
    }

    #[test]
    fn parse_display_roundtrip() {
        let d: CivilDate = "2019-01-01".parse().unwrap();
        assert_eq!(d.to_string(), "2019-01-01");
        let t: Instant = "2019-01-01T06:30:15".parse().unwrap();
        assert_eq!(t.to_string(), "2019-01-01T06:30:15");
        assert!("2019-1".parse::<CivilDate>().is_err());
        assert!("2019-02-30".parse::<CivilDate>().is_err());
        assert!("2019-01-01T25:00:00".parse::<Instant>().is_err());
    }

    #[test]
    fn hours_since_counts_days_and_time() {
        let origin: Instant = "2019-01-01T00:00:00".parse().unwrap();
        let later: Instant = "2019-01-02T06:00:00".parse().unwrap();
        assert_eq!(later.hours_since(&origin), 30.0);
        assert_eq!(origin.hours_since(&later), -30.0);
    }

    #[test]
    fn ordering_follows_calendar() {
        let a = CivilDate::new(2019, 12, 31).unwrap();
        let b = CivilDate::new(2020, 1, 1).unwrap();
        assert!(a < b);
        assert_eq!(b.days_since(&a), 1);
        assert_eq!(a.plus_days(1), b);
    }
}
