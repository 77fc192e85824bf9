//! Pooled panel OLS with time fixed effects.
//!
//! Time effects enter as explicit per-period dummies (first period
//! absorbed by the intercept), so the estimator coincides with plain OLS
//! on the dummy-augmented stacked design.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use serde::Serialize;

use super::ols::qr_least_squares;
use super::{t_crit_975, t_two_sided_p, EconError};
use crate::series::TimeSeries;

/// Outcome and regressor series for one panel entity.
#[derive(Debug, Clone)]
pub struct EntitySeries {
    pub y: TimeSeries,
    pub x: TimeSeries,
}

/// Pooled-panel fit with time effects.
#[derive(Debug, Clone, Serialize)]
pub struct PanelResult {
    /// "const" plus one label per lag; time dummies are absorbed, not listed.
    pub names: Vec<String>,
    pub coef: Vec<f64>,
    pub se: Vec<f64>,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    /// R^2 of the full fitted model, dummies included.
    pub r2: f64,
    /// Squared correlation between entity-mean outcomes and entity-mean fits.
    pub r2_between: f64,
    pub n: usize,
    pub entities: usize,
    /// Number of time dummies included in the fit.
    pub time_dummies: usize,
    /// Collinear dummy columns dropped during fitting.
    pub warnings: Vec<String>,
}

/// Regress stacked entity outcomes on lags of the entity regressor plus
/// per-period dummies.
///
/// Observations missing any lag are dropped listwise. A collinear time
/// dummy is dropped with a warning; a collinear lag column is an error.
pub fn panel_ols_time_effects(
    entities: &BTreeMap<String, EntitySeries>,
    lags: &[u32],
    regressor_label: &str,
) -> Result<PanelResult, EconError> {
    assert!(!lags.is_empty(), "lag set must be non-empty");

    // Stack listwise-complete rows across entities.
    struct Row {
        entity: usize,
        date: NaiveDate,
        y: f64,
        x: Vec<f64>,
    }
    let mut rows: Vec<Row> = Vec::new();
    for (idx, series) in entities.values().enumerate() {
        let freq = series.y.frequency;
        for (date, yval) in series.y.iter() {
            let xvals: Option<Vec<f64>> = lags
                .iter()
                .map(|&l| series.x.get(freq.shift_back(date, l)))
                .collect();
            if let Some(x) = xvals {
                rows.push(Row { entity: idx, date, y: yval, x });
            }
        }
    }
    let distinct: usize = {
        let mut ids: Vec<usize> = rows.iter().map(|r| r.entity).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    };
    if distinct < 2 {
        return Err(EconError::TooFewEntities { found: distinct });
    }

    rows.sort_by_key(|r| (r.entity, r.date));
    let n = rows.len();

    // Period index, first period omitted.
    let mut periods: Vec<NaiveDate> = rows.iter().map(|r| r.date).collect();
    periods.sort_unstable();
    periods.dedup();
    let dummy_periods = &periods[1..];

    let mut names: Vec<String> = vec!["const".to_string()];
    names.extend(lags.iter().map(|l| format!("{regressor_label}(t-{l})")));
    let k_reported = names.len();
    names.extend(dummy_periods.iter().map(|d| format!("time[{d}]")));

    let mut columns: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for (j, _) in lags.iter().enumerate() {
        columns.push(rows.iter().map(|r| r.x[j]).collect());
    }
    for period in dummy_periods {
        columns.push(rows.iter().map(|r| if r.date == *period { 1.0 } else { 0.0 }).collect());
    }
    let y: Vec<f64> = rows.iter().map(|r| r.y).collect();

    let k_total = columns.len();
    if n <= k_total {
        return Err(EconError::TooFewObservations { n, needed: k_total });
    }

    let col_refs: Vec<&[f64]> = columns.iter().map(|c| c.as_slice()).collect();
    let fit = qr_least_squares(&y, &names, &col_refs, true, k_reported)?;
    let warnings: Vec<String> =
        fit.dropped.iter().map(|c| format!("dropped collinear time dummy {c}")).collect();

    let kept = fit.names.len();
    let df = n - kept;
    let sigma2 = fit.rss / df as f64;
    let tcrit = t_crit_975(df as f64);

    let mut coef = Vec::with_capacity(k_reported);
    let mut se = Vec::with_capacity(k_reported);
    let mut tstats = Vec::with_capacity(k_reported);
    let mut p = Vec::with_capacity(k_reported);
    let mut ci_low = Vec::with_capacity(k_reported);
    let mut ci_high = Vec::with_capacity(k_reported);
    for j in 0..k_reported {
        let b = fit.coef[j];
        let s = (sigma2 * fit.xtx_inv_diag[j]).max(0.0).sqrt();
        let t = if s > 0.0 { b / s } else { 0.0 };
        coef.push(b);
        se.push(s);
        tstats.push(t);
        p.push(t_two_sided_p(t, df as f64));
        ci_low.push(b - tcrit * s);
        ci_high.push(b + tcrit * s);
    }

    let ybar = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let r2 = if tss > 0.0 { 1.0 - fit.rss / tss } else { 0.0 };

    // Between fit: correlation of entity means of y and fitted y.
    let mut sums: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
    for (row, fitval) in rows.iter().zip(&fit.fitted) {
        let e = sums.entry(row.entity).or_insert((0.0, 0.0, 0));
        e.0 += row.y;
        e.1 += fitval;
        e.2 += 1;
    }
    let mean_y: Vec<f64> = sums.values().map(|(sy, _, c)| sy / *c as f64).collect();
    let mean_fit: Vec<f64> = sums.values().map(|(_, sf, c)| sf / *c as f64).collect();
    let r2_between = squared_correlation(&mean_y, &mean_fit);

    Ok(PanelResult {
        names: fit.names[..k_reported].to_vec(),
        coef,
        se,
        t: tstats,
        p,
        ci_low,
        ci_high,
        r2,
        r2_between,
        n,
        entities: distinct,
        time_dummies: kept - k_reported,
        warnings,
    })
}

fn squared_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    if a.len() < 2 {
        return 0.0;
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    let mut sab = 0.0;
    for (x, y) in a.iter().zip(b) {
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
        sab += (x - ma) * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return 0.0;
    }
    (sab * sab) / (saa * sbb)
}
