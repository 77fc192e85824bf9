//! CSV readers and writers for the fixed input schemas.
//!
//! All files are UTF-8, comma-separated, ISO-8601 dates, `.` decimal
//! separator. An empty field means missing. Schemas:
//!
//! ```text
//! prices.csv:    date,symbol,close_usd,market_cap_usd,volume_usd
//! tvl.csv:       date,symbol,tvl_usd
//! network.csv:   date,symbol,address_count,transaction_count
//! attention.csv: week_start,term,interest
//! ```

use std::collections::BTreeMap;
use std::io::{Read, Write};

use chrono::NaiveDate;
use serde::Serialize;

use super::{AttentionSeries, DataError, Observation, TokenPanel};
use crate::series::Frequency;

/// Rows from an extension file whose symbol never appears in the price panel.
/// They are kept (attached to fresh symbols) and listed here for reporting.
#[derive(Debug, Clone, Default, Serialize)]
pub struct UnmatchedReport {
    pub symbols: Vec<String>,
    pub row_count: usize,
}

fn reader_from(source: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new().flexible(false).from_reader(source)
}

fn header_index(
    headers: &csv::StringRecord,
    file: &str,
    column: &str,
) -> Result<usize, DataError> {
    headers
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| DataError::MissingColumn { file: file.into(), column: column.into() })
}

fn parse_date(raw: &str, row: u64) -> Result<NaiveDate, DataError> {
    NaiveDate::parse_from_str(raw.trim(), "%Y-%m-%d")
        .map_err(|_| DataError::BadDate { row, value: raw.to_string() })
}

/// Parse an optional, finite, non-negative numeric field.
fn parse_amount(raw: &str, row: u64, column: &str) -> Result<Option<f64>, DataError> {
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(None);
    }
    let value: f64 = raw.parse().map_err(|_| DataError::SchemaMismatch {
        row,
        message: format!("unparseable number '{raw}' in column '{column}'"),
    })?;
    if !value.is_finite() {
        return Err(DataError::SchemaMismatch {
            row,
            message: format!("non-finite value in column '{column}'"),
        });
    }
    if value < 0.0 {
        return Err(DataError::NegativeValue { row, column: column.into(), value });
    }
    Ok(Some(value))
}

/// Load the prices file into a fresh daily [`TokenPanel`].
pub fn ingest_prices(source: impl Read) -> Result<TokenPanel, DataError> {
    let file = "prices.csv";
    let mut rdr = reader_from(source);
    let headers = rdr
        .headers()
        .map_err(|e| DataError::SchemaMismatch { row: 0, message: e.to_string() })?
        .clone();
    let i_date = header_index(&headers, file, "date")?;
    let i_symbol = header_index(&headers, file, "symbol")?;
    let i_close = header_index(&headers, file, "close_usd")?;
    let i_mcap = header_index(&headers, file, "market_cap_usd")?;
    let i_vol = header_index(&headers, file, "volume_usd")?;

    let mut panel = TokenPanel::new(Frequency::Daily);
    for (idx, record) in rdr.records().enumerate() {
        let row = idx as u64 + 2; // 1-based, after the header
        let record = record.map_err(|e| DataError::SchemaMismatch { row, message: e.to_string() })?;
        let date = parse_date(&record[i_date], row)?;
        let symbol = record[i_symbol].trim().to_string();
        if symbol.is_empty() {
            return Err(DataError::SchemaMismatch { row, message: "empty symbol".into() });
        }
        if panel.get(&symbol, date).is_some() {
            return Err(DataError::DuplicateKey { row, symbol, date });
        }
        let obs = Observation {
            price: parse_amount(&record[i_close], row, "close_usd")?,
            market_cap: parse_amount(&record[i_mcap], row, "market_cap_usd")?,
            volume: parse_amount(&record[i_vol], row, "volume_usd")?,
            ..Default::default()
        };
        panel.insert(&symbol, date, obs);
    }
    Ok(panel)
}

/// Attach TVL rows to the panel; unmatched symbols are retained and reported.
pub fn ingest_tvl(
    source: impl Read,
    panel: &mut TokenPanel,
) -> Result<UnmatchedReport, DataError> {
    let file = "tvl.csv";
    let mut rdr = reader_from(source);
    let headers = rdr
        .headers()
        .map_err(|e| DataError::SchemaMismatch { row: 0, message: e.to_string() })?
        .clone();
    let i_date = header_index(&headers, file, "date")?;
    let i_symbol = header_index(&headers, file, "symbol")?;
    let i_tvl = header_index(&headers, file, "tvl_usd")?;

    let mut report = UnmatchedReport::default();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx as u64 + 2;
        let record = record.map_err(|e| DataError::SchemaMismatch { row, message: e.to_string() })?;
        let date = parse_date(&record[i_date], row)?;
        let symbol = record[i_symbol].trim().to_string();
        let tvl = parse_amount(&record[i_tvl], row, "tvl_usd")?;
        if !panel.contains_symbol(&symbol) && !report.symbols.contains(&symbol) {
            report.symbols.push(symbol.clone());
        }
        if !panel.contains_symbol(&symbol) {
            report.row_count += 1;
        }
        let mut obs = panel.get(&symbol, date).copied().unwrap_or_default();
        obs.tvl = tvl;
        panel.insert(&symbol, date, obs);
    }
    Ok(report)
}

/// Attach network counts to the panel; unmatched symbols reported as for TVL.
pub fn ingest_network(
    source: impl Read,
    panel: &mut TokenPanel,
) -> Result<UnmatchedReport, DataError> {
    let file = "network.csv";
    let mut rdr = reader_from(source);
    let headers = rdr
        .headers()
        .map_err(|e| DataError::SchemaMismatch { row: 0, message: e.to_string() })?
        .clone();
    let i_date = header_index(&headers, file, "date")?;
    let i_symbol = header_index(&headers, file, "symbol")?;
    let i_addr = header_index(&headers, file, "address_count")?;
    let i_trans = header_index(&headers, file, "transaction_count")?;

    let mut report = UnmatchedReport::default();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx as u64 + 2;
        let record = record.map_err(|e| DataError::SchemaMismatch { row, message: e.to_string() })?;
        let date = parse_date(&record[i_date], row)?;
        let symbol = record[i_symbol].trim().to_string();
        let addr = parse_amount(&record[i_addr], row, "address_count")?;
        let trans = parse_amount(&record[i_trans], row, "transaction_count")?;
        if !panel.contains_symbol(&symbol) {
            if !report.symbols.contains(&symbol) {
                report.symbols.push(symbol.clone());
            }
            report.row_count += 1;
        }
        let mut obs = panel.get(&symbol, date).copied().unwrap_or_default();
        obs.address_count = addr;
        obs.transaction_count = trans;
        panel.insert(&symbol, date, obs);
    }
    Ok(report)
}

/// Load the weekly search-interest file, one series per term.
pub fn ingest_attention(source: impl Read) -> Result<Vec<AttentionSeries>, DataError> {
    let file = "attention.csv";
    let mut rdr = reader_from(source);
    let headers = rdr
        .headers()
        .map_err(|e| DataError::SchemaMismatch { row: 0, message: e.to_string() })?
        .clone();
    let i_week = header_index(&headers, file, "week_start")?;
    let i_term = header_index(&headers, file, "term")?;
    let i_interest = header_index(&headers, file, "interest")?;

    let mut by_term: BTreeMap<String, BTreeMap<NaiveDate, u8>> = BTreeMap::new();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx as u64 + 2;
        let record = record.map_err(|e| DataError::SchemaMismatch { row, message: e.to_string() })?;
        let week = parse_date(&record[i_week], row)?;
        let term = record[i_term].trim().to_string();
        let raw = record[i_interest].trim();
        let value: i64 = raw.parse().map_err(|_| DataError::SchemaMismatch {
            row,
            message: format!("unparseable interest '{raw}'"),
        })?;
        if !(0..=100).contains(&value) {
            return Err(DataError::InterestOutOfRange { row, value });
        }
        if by_term.entry(term.clone()).or_default().insert(week, value as u8).is_some() {
            return Err(DataError::DuplicateKey { row, symbol: term, date: week });
        }
    }

    let mut out = Vec::new();
    for (term, rows) in by_term {
        let mut prev: Option<NaiveDate> = None;
        for &date in rows.keys() {
            if let Some(p) = prev {
                if (date - p).num_days() != 7 {
                    return Err(DataError::SchemaMismatch {
                        row: 0,
                        message: format!(
                            "term '{term}': week starts {p} and {date} are not 7 days apart"
                        ),
                    });
                }
            }
            prev = Some(date);
        }
        out.push(AttentionSeries { term, rows });
    }
    Ok(out)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Write the price fields of a panel in the prices.csv schema.
pub fn write_prices_csv(panel: &TokenPanel, sink: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["date", "symbol", "close_usd", "market_cap_usd", "volume_usd"])?;
    for symbol in panel.symbols().map(str::to_string).collect::<Vec<_>>() {
        for (date, obs) in panel.observations(&symbol).unwrap() {
            w.write_record([
                date.to_string(),
                symbol.clone(),
                fmt_opt(obs.price),
                fmt_opt(obs.market_cap),
                fmt_opt(obs.volume),
            ])?;
        }
    }
    w.flush()
}

/// Write the TVL extension of a panel in the tvl.csv schema.
pub fn write_tvl_csv(panel: &TokenPanel, sink: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["date", "symbol", "tvl_usd"])?;
    for symbol in panel.symbols().map(str::to_string).collect::<Vec<_>>() {
        for (date, obs) in panel.observations(&symbol).unwrap() {
            if let Some(tvl) = obs.tvl {
                w.write_record([date.to_string(), symbol.clone(), tvl.to_string()])?;
            }
        }
    }
    w.flush()
}

/// Write the network extension of a panel in the network.csv schema.
pub fn write_network_csv(panel: &TokenPanel, sink: impl Write) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["date", "symbol", "address_count", "transaction_count"])?;
    for symbol in panel.symbols().map(str::to_string).collect::<Vec<_>>() {
        for (date, obs) in panel.observations(&symbol).unwrap() {
            if obs.address_count.is_some() || obs.transaction_count.is_some() {
                w.write_record([
                    date.to_string(),
                    symbol.clone(),
                    fmt_opt(obs.address_count),
                    fmt_opt(obs.transaction_count),
                ])?;
            }
        }
    }
    w.flush()
}
