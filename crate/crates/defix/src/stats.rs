//! Returns and descriptive statistics.
//!
//! Conventions, chosen once and used everywhere:
//! - returns are simple returns stored as fractions; percent only at rendering
//! - sd uses the n-1 sample denominator
//! - skewness is the raw moment ratio m3 / m2^(3/2)
//! - kurtosis is excess: m4 / m2^2 - 3
//! - Sharpe is mean / sd with a zero risk-free rate, no annualisation
//! - Durbin-Watson applies to the (mean-deviated) series itself

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::series::{Frequency, TimeSeries};

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("level at {date} is not positive ({value})")]
    NonPositiveLevel { date: NaiveDate, value: f64 },
    #[error("too few observations: have {n}, need {needed}")]
    TooFewObservations { n: usize, needed: usize },
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("return at {date} is {value}, must be > -1 and finite")]
    InvalidReturn { date: NaiveDate, value: f64 },
}

/// Dated simple returns (fractions) at a declared frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnSeries {
    series: TimeSeries,
}

impl ReturnSeries {
    /// Wrap a series of returns, enforcing `r > -1` and finiteness.
    pub fn new(series: TimeSeries) -> Result<Self, StatsError> {
        for (date, value) in series.iter() {
            if !value.is_finite() || value <= -1.0 {
                return Err(StatsError::InvalidReturn { date, value });
            }
        }
        Ok(ReturnSeries { series })
    }

    pub fn frequency(&self) -> Frequency {
        self.series.frequency
    }

    pub fn as_series(&self) -> &TimeSeries {
        &self.series
    }

    pub fn into_series(self) -> TimeSeries {
        self.series
    }

    pub fn values(&self) -> Vec<f64> {
        self.series.values().collect()
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Compound to a coarser frequency: `r_bucket = prod(1 + r_d) - 1`.
    pub fn resample(&self, to: Frequency) -> ReturnSeries {
        ReturnSeries {
            series: crate::series::resample(&self.series, to, crate::series::Aggregation::Compound),
        }
    }
}

/// `r_t = P_t / P_{t-1} - 1` over consecutive observations.
pub fn simple_returns(levels: &TimeSeries) -> Result<ReturnSeries, StatsError> {
    if levels.len() < 2 {
        return Err(StatsError::TooFewObservations { n: levels.len(), needed: 2 });
    }
    for (date, value) in levels.iter() {
        if !(value > 0.0) || !value.is_finite() {
            return Err(StatsError::NonPositiveLevel { date, value });
        }
    }
    let mut out = TimeSeries::new(levels.frequency);
    let mut prev: Option<f64> = None;
    for (date, value) in levels.iter() {
        if let Some(p) = prev {
            out.insert(date, value / p - 1.0);
        }
        prev = Some(value);
    }
    ReturnSeries::new(out)
}

/// Running compounded return: `c_t = prod_{s<=t}(1 + r_s) - 1`.
pub fn cumulative_returns(returns: &ReturnSeries) -> TimeSeries {
    let mut out = TimeSeries::new(returns.frequency());
    let mut acc = 1.0;
    for (date, r) in returns.as_series().iter() {
        acc *= 1.0 + r;
        out.insert(date, acc - 1.0);
    }
    out
}

/// One row of the summary-statistics table.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub mean: f64,
    pub sd: f64,
    pub max: f64,
    pub min: f64,
    pub skewness: f64,
    /// Excess kurtosis (normal = 0).
    pub kurtosis_excess: f64,
    pub durbin_watson: f64,
    pub sharpe: Option<f64>,
    pub n: usize,
}

/// Descriptive statistics over raw values in time order.
pub fn summary_stats(values: &[f64], with_sharpe: bool) -> Result<SummaryRow, StatsError> {
    let n = values.len();
    if n < 4 {
        return Err(StatsError::TooFewObservations { n, needed: 4 });
    }
    let nf = n as f64;
    let mean = values.iter().sum::<f64>() / nf;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    let m3 = values.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / nf;
    let m4 = values.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / nf;
    if m2 <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    let skewness = m3 / m2.powf(1.5);
    let kurtosis_excess = m4 / (m2 * m2) - 3.0;
    let dw = durbin_watson_unchecked(values, mean);
    let sharpe = if with_sharpe { Some(mean / sd) } else { None };
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(SummaryRow { mean, sd, max, min, skewness, kurtosis_excess, durbin_watson: dw, sharpe, n })
}

/// `DW = sum_{t>=2} (x_t - x_{t-1})^2 / sum_t (x_t - xbar)^2`.
pub fn durbin_watson(values: &[f64]) -> Result<f64, StatsError> {
    if values.len() < 2 {
        return Err(StatsError::TooFewObservations { n: values.len(), needed: 2 });
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let denom: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    if denom <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok(durbin_watson_unchecked(values, mean))
}

fn durbin_watson_unchecked(values: &[f64], mean: f64) -> f64 {
    let denom: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    let num: f64 = values.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    num / denom
}
