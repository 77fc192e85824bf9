//! Derived explanatory variables.

use chrono::NaiveDate;
use serde::Serialize;

use crate::econometrics::{ols, Design, EconError, OlsOptions, RegressionResult};
use crate::series::TimeSeries;

/// Why a date was left missing while deriving a feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SkipReason {
    NonPositiveEndpoint,
    ZeroDenominator,
    MissingInput,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkipEvent {
    pub date: NaiveDate,
    pub reason: SkipReason,
}

/// Log-difference growth, with skipped dates reported rather than emitted
/// as infinities.
#[derive(Debug, Clone)]
pub struct GrowthSeries {
    pub series: TimeSeries,
    pub skipped: Vec<SkipEvent>,
}

/// `d_t = ln(x_t) - ln(x_{t-1})` wherever both endpoints are positive.
///
/// A non-positive endpoint makes every difference touching it missing; the
/// skip report counts them.
pub fn log_growth(series: &TimeSeries) -> GrowthSeries {
    let mut out = TimeSeries::new(series.frequency);
    let mut skipped = Vec::new();
    let mut prev: Option<f64> = None;
    for (date, value) in series.iter() {
        if let Some(p) = prev {
            if p > 0.0 && value > 0.0 {
                out.insert(date, value.ln() - p.ln());
            } else {
                skipped.push(SkipEvent { date, reason: SkipReason::NonPositiveEndpoint });
            }
        }
        prev = Some(value);
    }
    GrowthSeries { series: out, skipped }
}

/// TVL divided by market cap on common dates with a positive denominator.
#[derive(Debug, Clone)]
pub struct RatioSeries {
    pub series: TimeSeries,
    pub skipped: Vec<SkipEvent>,
}

pub fn valuation_ratio(tvl: &TimeSeries, mcap: &TimeSeries) -> RatioSeries {
    assert_eq!(tvl.frequency, mcap.frequency, "inputs must share a frequency");
    let mut out = TimeSeries::new(tvl.frequency);
    let mut skipped = Vec::new();
    for (date, t) in tvl.iter() {
        match mcap.get(date) {
            Some(mc) if mc > 0.0 => out.insert(date, t / mc),
            Some(_) => skipped.push(SkipEvent { date, reason: SkipReason::ZeroDenominator }),
            None => skipped.push(SkipEvent { date, reason: SkipReason::MissingInput }),
        }
    }
    RatioSeries { series: out, skipped }
}

/// Pooled log-log size fit: `ln(mcap) = a + b ln(tvl)`.
#[derive(Debug, Clone, Serialize)]
pub struct LogLogFit {
    pub fit: RegressionResult,
    /// `(symbol, date, ln_tvl, ln_mcap)` point cloud for plotting.
    pub points: Vec<(String, NaiveDate, f64, f64)>,
}

/// Fit `ln(mcap)` on `ln(tvl)` over all strictly positive pairs.
///
/// `pairs` holds per-symbol aligned (tvl, mcap) series.
pub fn loglog_fit(pairs: &[(String, TimeSeries, TimeSeries)]) -> Result<LogLogFit, EconError> {
    let mut points = Vec::new();
    for (symbol, tvl, mcap) in pairs {
        for (date, t) in tvl.iter() {
            if let Some(mc) = mcap.get(date) {
                if t > 0.0 && mc > 0.0 {
                    points.push((symbol.clone(), date, t.ln(), mc.ln()));
                }
            }
        }
    }
    if points.len() < 3 {
        return Err(EconError::TooFewObservations { n: points.len(), needed: 2 });
    }
    let x: Vec<f64> = points.iter().map(|p| p.2).collect();
    let y: Vec<f64> = points.iter().map(|p| p.3).collect();
    let design = Design::from_columns(vec![("ln_tvl".to_string(), x)]);
    let fit = ols(&y, &design, OlsOptions::default())?;
    Ok(LogLogFit { fit, points })
}
