//! Shared test helpers: independent oracles and synthetic data builders.
//!
//! The solvers here deliberately avoid the library's QR path: they work on
//! the normal equations with explicit Gauss-Jordan elimination, so agreement
//! with the library is a genuine two-route check.

#![allow(dead_code)]

use chrono::{Duration, NaiveDate};
use defix::market_data::{Observation, TokenPanel};
use defix::series::{Frequency, TimeSeries};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

/// Output of the normal-equations oracle.
pub struct OracleFit {
    pub coef: Vec<f64>,
    pub se: Vec<f64>,
    pub t: Vec<f64>,
    pub r2: f64,
}

/// Invert a symmetric positive-definite matrix by Gauss-Jordan with
/// partial pivoting. Panics on a singular input; oracle callers keep
/// their designs well-conditioned.
pub fn invert(matrix: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = matrix.len();
    let mut aug: Vec<Vec<f64>> = matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..k {
        let pivot = (c..k)
            .max_by(|&a, &b| aug[a][c].abs().partial_cmp(&aug[b][c].abs()).unwrap())
            .unwrap();
        aug.swap(c, pivot);
        let pv = aug[c][c];
        assert!(pv.abs() > 1e-300, "oracle: singular normal equations");
        for v in aug[c].iter_mut() {
            *v /= pv;
        }
        for r in 0..k {
            if r != c {
                let f = aug[r][c];
                for j in 0..2 * k {
                    aug[r][j] -= f * aug[c][j];
                }
            }
        }
    }
    aug.into_iter().map(|row| row[k..].to_vec()).collect()
}

/// OLS with intercept via explicit normal equations `X'X b = X'y`.
///
/// `xcols` excludes the intercept; it is prepended here, mirroring the
/// library's convention.
pub fn oracle_ols(y: &[f64], xcols: &[Vec<f64>]) -> OracleFit {
    let n = y.len();
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; n]];
    cols.extend(xcols.iter().cloned());
    let k = cols.len();

    let mut xtx = vec![vec![0.0; k]; k];
    let mut xty = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            xtx[i][j] = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
        }
        xty[i] = cols[i].iter().zip(y).map(|(a, b)| a * b).sum();
    }
    let inv = invert(&xtx);
    let coef: Vec<f64> = (0..k).map(|i| (0..k).map(|j| inv[i][j] * xty[j]).sum()).collect();

    let mut rss = 0.0;
    for r in 0..n {
        let fit: f64 = (0..k).map(|j| cols[j][r] * coef[j]).sum();
        rss += (y[r] - fit) * (y[r] - fit);
    }
    let sigma2 = rss / (n - k) as f64;
    let se: Vec<f64> = (0..k).map(|j| (sigma2 * inv[j][j]).sqrt()).collect();
    let t: Vec<f64> =
        coef.iter().zip(&se).map(|(b, s)| if *s > 0.0 { b / s } else { 0.0 }).collect();

    let ybar = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };
    OracleFit { coef, se, t, r2 }
}

/// Central moments by raw power sums (an intentionally different route
/// from the library's deviation-based accumulation).
pub struct MomentOracle {
    pub mean: f64,
    pub sd: f64,
    pub skewness: f64,
    pub kurtosis_excess: f64,
}

pub fn oracle_moments(values: &[f64]) -> MomentOracle {
    let n = values.len() as f64;
    let s1: f64 = values.iter().sum();
    let s2: f64 = values.iter().map(|v| v * v).sum();
    let s3: f64 = values.iter().map(|v| v * v * v).sum();
    let s4: f64 = values.iter().map(|v| v * v * v * v).sum();
    let m = s1 / n;
    let m2 = s2 / n - m * m;
    let m3 = s3 / n - 3.0 * m * s2 / n + 2.0 * m * m * m;
    let m4 = s4 / n - 4.0 * m * s3 / n + 6.0 * m * m * s2 / n - 3.0 * m * m * m * m;
    MomentOracle {
        mean: m,
        sd: (m2 * n / (n - 1.0)).sqrt(),
        skewness: m3 / m2.powf(1.5),
        kurtosis_excess: m4 / (m2 * m2) - 3.0,
    }
}

pub fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

/// Standard normal via Box-Muller.
pub fn normal(rng: &mut ChaCha20Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// A daily series over consecutive dates starting 2021-01-01.
pub fn daily_series(values: &[f64]) -> TimeSeries {
    TimeSeries::from_rows(
        Frequency::Daily,
        values.iter().enumerate().map(|(i, v)| (ymd(2021, 1, 1) + Duration::days(i as i64), *v)),
    )
}

/// A weekly series over consecutive Sundays starting 2021-01-03.
pub fn weekly_series(values: &[f64]) -> TimeSeries {
    TimeSeries::from_rows(
        Frequency::Weekly,
        values
            .iter()
            .enumerate()
            .map(|(i, v)| (ymd(2021, 1, 3) + Duration::days(7 * i as i64), *v)),
    )
}

pub fn observation(price: f64, mcap: f64) -> Observation {
    Observation {
        price: Some(price),
        market_cap: Some(mcap),
        volume: Some(1000.0),
        ..Default::default()
    }
}

/// Geometric-random-walk panel of `tokens` symbols over `days` days.
pub fn random_panel(rng: &mut ChaCha20Rng, tokens: usize, days: i64, start: NaiveDate) -> TokenPanel {
    let mut panel = TokenPanel::new(Frequency::Daily);
    for s in 0..tokens {
        let symbol = format!("TOK{s:02}");
        let mut price = rng.gen_range(0.5_f64..100.0);
        let supply = rng.gen_range(1.0e5_f64..1.0e8);
        let vol = rng.gen_range(0.01_f64..0.06);
        for d in 0..days {
            price *= (vol * normal(rng)).exp();
            panel.insert(&symbol, start + Duration::days(d), observation(price, price * supply));
        }
    }
    panel
}

/// Path to the bundled fixture directory at the workspace root.
pub fn fixture_dir() -> std::path::PathBuf {
    std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}
