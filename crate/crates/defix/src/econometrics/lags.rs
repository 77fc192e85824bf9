//! Lag alignment for dated regressions.

use chrono::NaiveDate;

use super::{Design, EconError};
use crate::series::TimeSeries;

/// A listwise-complete design built from lagged regressor series.
#[derive(Debug, Clone)]
pub struct LaggedDesign {
    /// Outcome dates that survived listwise deletion, ascending.
    pub dates: Vec<NaiveDate>,
    pub y: Vec<f64>,
    /// One column per (regressor, lag), labelled `name(t-l)`.
    pub columns: Vec<(String, Vec<f64>)>,
}

impl LaggedDesign {
    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn design(&self) -> Design {
        Design::from_columns(self.columns.clone())
    }
}

/// Align `y` with lagged copies of each regressor series.
///
/// The lag is in calendar buckets of the outcome's frequency: column
/// `name(t-l)` at date `t` holds the regressor's value at `t` minus `l`
/// buckets. Rows missing any lag (or the outcome) are dropped listwise.
pub fn make_lags(
    y: &TimeSeries,
    regressors: &[(&str, &TimeSeries)],
    lags: &[u32],
) -> Result<LaggedDesign, EconError> {
    assert!(!lags.is_empty(), "lag set must be non-empty");
    assert!(lags.iter().all(|&l| l >= 1), "lags must be >= 1");
    let freq = y.frequency;

    let mut dates = Vec::new();
    let mut yv = Vec::new();
    let mut columns: Vec<(String, Vec<f64>)> = regressors
        .iter()
        .flat_map(|(name, _)| lags.iter().map(move |l| (format!("{name}(t-{l})"), Vec::new())))
        .collect();

    for (date, yval) in y.iter() {
        let mut row = Vec::with_capacity(columns.len());
        let mut complete = true;
        'outer: for (_, series) in regressors {
            for &lag in lags {
                match series.get(freq.shift_back(date, lag)) {
                    Some(v) => row.push(v),
                    None => {
                        complete = false;
                        break 'outer;
                    }
                }
            }
        }
        if complete {
            dates.push(date);
            yv.push(yval);
            for (col, v) in columns.iter_mut().zip(row) {
                col.1.push(v);
            }
        }
    }

    if yv.is_empty() {
        return Err(EconError::SeriesTooShort);
    }
    Ok(LaggedDesign { dates, y: yv, columns })
}
