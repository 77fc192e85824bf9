//! Loading, validation, cleaning and alignment of the input datasets.
//!
//! Everything downstream consumes the [`TokenPanel`] built here: a per-token,
//! per-day table of price, market cap and volume, optionally extended with
//! TVL and network counts for the subset of tokens that have them.

mod ingest;

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{Aggregation, Frequency, TimeSeries};

pub use ingest::{
    ingest_attention, ingest_network, ingest_prices, ingest_tvl, write_network_csv,
    write_prices_csv, write_tvl_csv,
};

/// Errors raised while loading or validating input data.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing column '{column}' in {file}")]
    MissingColumn { file: String, column: String },
    #[error("row {row}: duplicate key ({symbol}, {date})")]
    DuplicateKey { row: u64, symbol: String, date: NaiveDate },
    #[error("row {row}: negative value {value} in column '{column}'")]
    NegativeValue { row: u64, column: String, value: f64 },
    #[error("row {row}: unparseable date '{value}'")]
    BadDate { row: u64, value: String },
    #[error("row {row}: {message}")]
    SchemaMismatch { row: u64, message: String },
    #[error("row {row}: search interest {value} outside 0..=100")]
    InterestOutOfRange { row: u64, value: i64 },
    #[error("io error reading {file}: {source}")]
    Io {
        file: String,
        #[source]
        source: std::io::Error,
    },
}

/// One token-day of market data. Absent fields are missing, not zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub price: Option<f64>,
    pub market_cap: Option<f64>,
    pub volume: Option<f64>,
    pub tvl: Option<f64>,
    pub address_count: Option<f64>,
    pub transaction_count: Option<f64>,
}

/// Per-token, per-date observation panel at a single frequency.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TokenPanel {
    pub frequency: Frequency,
    rows: BTreeMap<String, BTreeMap<NaiveDate, Observation>>,
}

impl TokenPanel {
    pub fn new(frequency: Frequency) -> Self {
        TokenPanel { frequency, rows: BTreeMap::new() }
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.rows.keys().map(|s| s.as_str())
    }

    pub fn symbol_count(&self) -> usize {
        self.rows.len()
    }

    pub fn contains_symbol(&self, symbol: &str) -> bool {
        self.rows.contains_key(symbol)
    }

    pub fn observations(&self, symbol: &str) -> Option<&BTreeMap<NaiveDate, Observation>> {
        self.rows.get(symbol)
    }

    pub fn get(&self, symbol: &str, date: NaiveDate) -> Option<&Observation> {
        self.rows.get(symbol).and_then(|m| m.get(&date))
    }

    pub fn insert(&mut self, symbol: &str, date: NaiveDate, obs: Observation) {
        self.rows.entry(symbol.to_string()).or_default().insert(date, obs);
    }

    pub fn remove_symbol(&mut self, symbol: &str) {
        self.rows.remove(symbol);
    }

    /// Union of all observation dates across symbols, ascending.
    pub fn all_dates(&self) -> Vec<NaiveDate> {
        let mut dates = BTreeSet::new();
        for obs in self.rows.values() {
            dates.extend(obs.keys().copied());
        }
        dates.into_iter().collect()
    }

    /// Total number of (symbol, date) rows.
    pub fn row_count(&self) -> usize {
        self.rows.values().map(|m| m.len()).sum()
    }

    /// Symbols that carry at least one TVL observation.
    pub fn symbols_with_tvl(&self) -> Vec<String> {
        self.symbols_with(|o| o.tvl.is_some())
    }

    /// Symbols that carry at least one network-count observation.
    pub fn symbols_with_network(&self) -> Vec<String> {
        self.symbols_with(|o| o.address_count.is_some() || o.transaction_count.is_some())
    }

    fn symbols_with(&self, pred: impl Fn(&Observation) -> bool) -> Vec<String> {
        self.rows
            .iter()
            .filter(|(_, obs)| obs.values().any(|o| pred(o)))
            .map(|(s, _)| s.clone())
            .collect()
    }

    /// Extract one field of one symbol as a dated series, skipping missing.
    pub fn field_series(
        &self,
        symbol: &str,
        field: impl Fn(&Observation) -> Option<f64>,
    ) -> TimeSeries {
        let mut out = TimeSeries::new(self.frequency);
        if let Some(obs) = self.rows.get(symbol) {
            for (date, o) in obs {
                if let Some(v) = field(o) {
                    out.insert(*date, v);
                }
            }
        }
        out
    }

    /// Price series for one symbol.
    pub fn prices(&self, symbol: &str) -> TimeSeries {
        self.field_series(symbol, |o| o.price)
    }
}

/// Weekly search-interest series for one term, values in `0..=100`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionSeries {
    pub term: String,
    pub rows: BTreeMap<NaiveDate, u8>,
}

impl AttentionSeries {
    /// View as a weekly `TimeSeries` of f64 interest levels.
    pub fn as_series(&self) -> TimeSeries {
        TimeSeries::from_rows(
            Frequency::Weekly,
            self.rows.iter().map(|(d, v)| (*d, *v as f64)),
        )
    }
}

/// Missing-price handling for [`clean_panel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CleanPolicy {
    /// Remove rows whose price is missing (the default).
    #[default]
    DropMissing,
    /// Carry the last seen price forward into rows that lack one.
    ForwardFill,
}

/// Per-symbol outcome of a cleaning pass.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CleaningReport {
    /// symbol -> (rows kept, rows dropped or filled)
    pub per_symbol: BTreeMap<String, (usize, usize)>,
    /// Symbols removed because nothing survived.
    pub dropped_symbols: Vec<String>,
}

/// Remove (or fill) rows without a price; drop symbols left empty.
///
/// Cleaning never fails; the report carries the counts.
pub fn clean_panel(panel: &TokenPanel, policy: CleanPolicy) -> (TokenPanel, CleaningReport) {
    let mut out = TokenPanel::new(panel.frequency);
    let mut report = CleaningReport::default();
    for (symbol, obs) in &panel.rows {
        let mut kept = 0usize;
        let mut affected = 0usize;
        let mut last_price: Option<f64> = None;
        let mut cleaned: BTreeMap<NaiveDate, Observation> = BTreeMap::new();
        for (date, o) in obs {
            match (o.price, policy) {
                (Some(p), _) => {
                    last_price = Some(p);
                    cleaned.insert(*date, *o);
                    kept += 1;
                }
                (None, CleanPolicy::ForwardFill) if last_price.is_some() => {
                    let mut filled = *o;
                    filled.price = last_price;
                    cleaned.insert(*date, filled);
                    kept += 1;
                    affected += 1;
                }
                (None, _) => affected += 1,
            }
        }
        report.per_symbol.insert(symbol.clone(), (kept, affected));
        if cleaned.is_empty() {
            report.dropped_symbols.push(symbol.clone());
        } else {
            out.rows.insert(symbol.clone(), cleaned);
        }
    }
    (out, report)
}

/// Keep only symbols whose market cap meets `threshold` on `eval_date`.
///
/// The comparison is inclusive: a cap of exactly `threshold` survives.
/// Symbols without a market cap on `eval_date` are excluded.
pub fn filter_min_mcap(panel: &TokenPanel, threshold: f64, eval_date: NaiveDate) -> TokenPanel {
    let mut out = TokenPanel::new(panel.frequency);
    for (symbol, obs) in &panel.rows {
        let eligible = obs
            .get(&eval_date)
            .and_then(|o| o.market_cap)
            .map_or(false, |mc| mc >= threshold);
        if eligible {
            out.rows.insert(symbol.clone(), obs.clone());
        }
    }
    out
}

/// Re-export of the generic resampler; see [`crate::series::resample`].
pub fn resample_series(series: &TimeSeries, to: Frequency, how: Aggregation) -> TimeSeries {
    crate::series::resample(series, to, how)
}
