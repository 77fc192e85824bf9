//! Dated value series and frequency conversion.
//!
//! All series in this crate are keyed by calendar UTC days. Weekly buckets
//! start on Sunday so that weekly joins line up with the search-interest
//! data; monthly buckets are labelled by the first day of the month.

use std::collections::BTreeMap;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

/// Sampling frequency of a dated series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    #[default]
    Daily,
    Weekly,
    Monthly,
}

impl Frequency {
    /// Canonical bucket label for `date` at this frequency.
    pub fn bucket(&self, date: NaiveDate) -> NaiveDate {
        match self {
            Frequency::Daily => date,
            Frequency::Weekly => week_start(date),
            Frequency::Monthly => month_start(date),
        }
    }

    /// Bucket label `periods` buckets before `date` (which must be a
    /// canonical bucket label).
    pub fn shift_back(&self, date: NaiveDate, periods: u32) -> NaiveDate {
        match self {
            Frequency::Daily => date - Duration::days(periods as i64),
            Frequency::Weekly => date - Duration::days(7 * periods as i64),
            Frequency::Monthly => {
                let total = date.year() * 12 + date.month0() as i32 - periods as i32;
                let (year, month0) = (total.div_euclid(12), total.rem_euclid(12));
                NaiveDate::from_ymd_opt(year, month0 as u32 + 1, 1)
                    .expect("month arithmetic stays in range")
            }
        }
    }
}

impl std::fmt::Display for Frequency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Frequency::Daily => write!(f, "daily"),
            Frequency::Weekly => write!(f, "weekly"),
            Frequency::Monthly => write!(f, "monthly"),
        }
    }
}

/// Start of the Sunday-anchored week containing `date`.
pub fn week_start(date: NaiveDate) -> NaiveDate {
    let back = date.weekday().num_days_from_sunday() as i64;
    date - Duration::days(back)
}

/// First day of the month containing `date`.
pub fn month_start(date: NaiveDate) -> NaiveDate {
    date.with_day(1).expect("day 1 always valid")
}

/// A dated series of f64 values at a declared frequency.
///
/// Dates are unique and iterate in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub frequency: Frequency,
    rows: BTreeMap<NaiveDate, f64>,
}

impl TimeSeries {
    pub fn new(frequency: Frequency) -> Self {
        TimeSeries { frequency, rows: BTreeMap::new() }
    }

    pub fn from_rows(
        frequency: Frequency,
        rows: impl IntoIterator<Item = (NaiveDate, f64)>,
    ) -> Self {
        TimeSeries { frequency, rows: rows.into_iter().collect() }
    }

    pub fn insert(&mut self, date: NaiveDate, value: f64) {
        self.rows.insert(date, value);
    }

    pub fn get(&self, date: NaiveDate) -> Option<f64> {
        self.rows.get(&date).copied()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.rows.iter().map(|(d, v)| (*d, *v))
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.rows.keys().copied()
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.values().copied()
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.rows.keys().next().copied()
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.rows.keys().next_back().copied()
    }
}

/// How observations inside one bucket collapse to a single value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    /// Last observation in the bucket (level series).
    Last,
    /// Compound `(1 + r)` across the bucket, minus one (simple returns).
    Compound,
    /// Sum across the bucket (log differences add).
    Sum,
}

/// Resample a daily series to a coarser frequency.
///
/// Buckets with no observations are simply absent from the output; nothing
/// is fabricated. Panics if `to` is not coarser than the input frequency.
pub fn resample(series: &TimeSeries, to: Frequency, how: Aggregation) -> TimeSeries {
    assert!(
        coarser(series.frequency, to),
        "resample target must be coarser than the source frequency"
    );
    let mut out = TimeSeries::new(to);
    let mut current: Option<(NaiveDate, f64)> = None;
    for (date, value) in series.iter() {
        let bucket = to.bucket(date);
        match current {
            Some((b, acc)) if b == bucket => {
                let acc = match how {
                    Aggregation::Last => value,
                    Aggregation::Compound => (1.0 + acc) * (1.0 + value) - 1.0,
                    Aggregation::Sum => acc + value,
                };
                current = Some((b, acc));
            }
            Some((b, acc)) => {
                out.insert(b, acc);
                current = Some((bucket, value));
            }
            None => current = Some((bucket, value)),
        }
    }
    if let Some((b, acc)) = current {
        out.insert(b, acc);
    }
    out
}

fn coarser(from: Frequency, to: Frequency) -> bool {
    fn ord(f: Frequency) -> u8 {
        match f {
            Frequency::Daily => 0,
            Frequency::Weekly => 1,
            Frequency::Monthly => 2,
        }
    }
    ord(to) > ord(from)
}

/// Convenience constructor for calendar dates in tests and fixtures.
pub fn ymd(year: i32, month: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(year, month, day).expect("valid calendar date")
}

/// True if `date` is a Sunday (canonical weekly bucket label).
pub fn is_week_label(date: NaiveDate) -> bool {
    date.weekday() == Weekday::Sun
}
