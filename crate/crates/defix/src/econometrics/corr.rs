//! Pearson correlation with two-sided significance stars.

use serde::Serialize;

use super::{significance_stars, t_two_sided_p, EconError};
use crate::series::TimeSeries;

/// Symmetric correlation matrix with per-pair significance markers.
#[derive(Debug, Clone, Serialize)]
pub struct CorrMatrix {
    pub labels: Vec<String>,
    /// Row-major `r[i][j]`; diagonal is exactly 1.
    pub r: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
    pub stars: Vec<Vec<String>>,
    /// Pairwise-complete sample size per cell.
    pub n: Vec<Vec<usize>>,
}

/// Significance of a correlation from `t = r sqrt(n-2) / sqrt(1-r^2)`:
/// returns `(t, two-sided p)`. A perfect correlation maps to `p = 0`.
pub fn pearson_significance(r: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    if (1.0 - r * r) <= f64::EPSILON {
        return (f64::INFINITY, 0.0);
    }
    let t = r * ((nf - 2.0) / (1.0 - r * r)).sqrt();
    (t, t_two_sided_p(t, nf - 2.0))
}

/// Pearson r for paired samples plus its two-sided p-value from
/// `t = r sqrt(n-2) / sqrt(1-r^2)`.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64), EconError> {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    if n < 3 {
        return Err(EconError::TooFewObservations { n, needed: 2 });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
        sxy += (a - mx) * (b - my);
    }
    if sxx <= 0.0 {
        return Err(EconError::ZeroVariance { column: "x".into() });
    }
    if syy <= 0.0 {
        return Err(EconError::ZeroVariance { column: "y".into() });
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    let (_, p) = pearson_significance(r, n);
    Ok((r, p))
}

/// Pairwise-complete Pearson matrix over named series.
///
/// Each pair uses the dates where both series are present; pairs with fewer
/// than 3 shared observations, or with a constant column on the shared
/// dates, are an error.
pub fn pearson_matrix(columns: &[(&str, &TimeSeries)]) -> Result<CorrMatrix, EconError> {
    let k = columns.len();
    let labels: Vec<String> = columns.iter().map(|(n, _)| n.to_string()).collect();
    let mut r = vec![vec![0.0; k]; k];
    let mut p = vec![vec![0.0; k]; k];
    let mut stars = vec![vec![String::new(); k]; k];
    let mut n = vec![vec![0usize; k]; k];

    for i in 0..k {
        r[i][i] = 1.0;
        n[i][i] = columns[i].1.len();
        for j in 0..i {
            let mut xi = Vec::new();
            let mut xj = Vec::new();
            for (date, v) in columns[i].1.iter() {
                if let Some(w) = columns[j].1.get(date) {
                    xi.push(v);
                    xj.push(w);
                }
            }
            if xi.len() < 3 {
                return Err(EconError::TooFewObservations { n: xi.len(), needed: 2 });
            }
            let (rij, pij) = pearson(&xi, &xj).map_err(|e| match e {
                EconError::ZeroVariance { column } => EconError::ZeroVariance {
                    column: if column == "x" { labels[i].clone() } else { labels[j].clone() },
                },
                other => other,
            })?;
            r[i][j] = rij;
            r[j][i] = rij;
            p[i][j] = pij;
            p[j][i] = pij;
            let s = significance_stars(pij).to_string();
            stars[i][j] = s.clone();
            stars[j][i] = s;
            n[i][j] = xi.len();
            n[j][i] = xi.len();
        }
    }
    Ok(CorrMatrix { labels, r, p, stars, n })
}
