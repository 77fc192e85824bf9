//! Least squares via column-pivoted QR.

use nalgebra::{DMatrix, DVector};

use super::{t_crit_975, t_two_sided_p, EconError, RegressionResult};

/// Relative rank tolerance: a pivot below `RANK_TOL * largest column norm`
/// marks its column as linearly dependent.
const RANK_TOL: f64 = 1e-10;

/// A named design matrix without intercept; `ols` prepends one on request.
#[derive(Debug, Clone)]
pub struct Design {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n: usize,
}

impl Design {
    pub fn new(n: usize) -> Self {
        Design { names: Vec::new(), columns: Vec::new(), n }
    }

    pub fn push(&mut self, name: impl Into<String>, column: Vec<f64>) {
        assert_eq!(column.len(), self.n, "design columns must share a length");
        self.names.push(name.into());
        self.columns.push(column);
    }

    pub fn from_columns(columns: Vec<(String, Vec<f64>)>) -> Self {
        let n = columns.first().map_or(0, |(_, c)| c.len());
        let mut d = Design::new(n);
        for (name, col) in columns {
            d.push(name, col);
        }
        d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn k(&self) -> usize {
        self.columns.len()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OlsOptions {
    pub intercept: bool,
    /// Drop collinear non-protected columns instead of failing. The first
    /// `protected` columns (counting the intercept) must stay estimable.
    pub drop_collinear: bool,
    pub protected: usize,
}

impl Default for OlsOptions {
    fn default() -> Self {
        OlsOptions { intercept: true, drop_collinear: false, protected: 0 }
    }
}

pub(crate) struct QrFit {
    pub names: Vec<String>,
    pub coef: Vec<f64>,
    pub xtx_inv_diag: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    /// Labels of columns dropped for collinearity (empty unless allowed).
    pub dropped: Vec<String>,
}

/// Ordinary least squares of `y` on `x` (plus an intercept by default).
///
/// Coefficients come from a column-pivoted QR factorization; standard
/// errors from `sigma2 * (X'X)^-1` with `sigma2 = RSS / (n - k)`.
pub fn ols(y: &[f64], x: &Design, opts: OlsOptions) -> Result<RegressionResult, EconError> {
    let n = y.len();
    assert_eq!(n, x.n(), "y and design must share a length");

    let mut names: Vec<String> = Vec::new();
    let mut columns: Vec<&[f64]> = Vec::new();
    let intercept_col = vec![1.0; n];
    if opts.intercept {
        names.push("const".to_string());
        columns.push(&intercept_col);
    }
    for (name, col) in x.names().iter().zip(&x.columns) {
        names.push(name.clone());
        columns.push(col);
    }
    let k = columns.len();
    if n <= k + 1 {
        return Err(EconError::TooFewObservations { n, needed: k + 1 });
    }

    let protected = opts.protected + usize::from(opts.intercept);
    let fit = qr_least_squares(y, &names, &columns, opts.drop_collinear, protected)?;

    let kept = fit.names.len();
    let df = n - kept;
    let sigma2 = fit.rss / df as f64;

    let mut se = Vec::with_capacity(kept);
    let mut t = Vec::with_capacity(kept);
    let mut p = Vec::with_capacity(kept);
    let mut ci_low = Vec::with_capacity(kept);
    let mut ci_high = Vec::with_capacity(kept);
    let tcrit = t_crit_975(df as f64);
    for (b, v) in fit.coef.iter().zip(&fit.xtx_inv_diag) {
        let s = (sigma2 * v).max(0.0).sqrt();
        let tstat = if s > 0.0 { b / s } else { 0.0 };
        se.push(s);
        t.push(tstat);
        p.push(t_two_sided_p(tstat, df as f64));
        ci_low.push(b - tcrit * s);
        ci_high.push(b + tcrit * s);
    }

    // R^2 about the mean when an intercept is present, about zero otherwise.
    let tss = if opts.intercept {
        let mean = y.iter().sum::<f64>() / n as f64;
        y.iter().map(|v| (v - mean).powi(2)).sum::<f64>()
    } else {
        y.iter().map(|v| v * v).sum::<f64>()
    };
    let r2 = if tss > 0.0 { 1.0 - fit.rss / tss } else { 0.0 };

    Ok(RegressionResult {
        names: fit.names,
        coef: fit.coef,
        se,
        t,
        p,
        ci_low,
        ci_high,
        r2,
        n,
        df_resid: df,
        fitted: fit.fitted,
        residuals: fit.residuals,
    })
}

/// Column-pivoted QR least squares on explicit columns.
///
/// Returns coefficients for the kept columns in their original order, the
/// diagonal of `(X'X)^-1` restricted to those columns, and fit diagnostics.
pub(crate) fn qr_least_squares(
    y: &[f64],
    names: &[String],
    columns: &[&[f64]],
    drop_collinear: bool,
    protected: usize,
) -> Result<QrFit, EconError> {
    let n = y.len();
    let k = columns.len();
    let xmat = DMatrix::from_fn(n, k, |i, j| columns[j][i]);
    let max_col_norm = (0..k)
        .map(|j| xmat.column(j).norm())
        .fold(0.0_f64, f64::max);
    let tol = RANK_TOL * max_col_norm;

    let qr = xmat.clone().col_piv_qr();
    let rank = {
        let r = qr.r();
        (0..k.min(n)).take_while(|&i| r[(i, i)].abs() > tol).count()
    };

    if rank < k {
        // Identify the dependent columns via the pivot permutation: the
        // first `rank` pivot positions hold the independent set. The
        // sequence has no index accessor, so permute an index vector.
        let mut idx = DVector::from_fn(k, |i, _| i as f64);
        qr.p().permute_rows(&mut idx);
        let order: Vec<usize> = idx.iter().map(|v| *v as usize).collect();

        let kept: Vec<usize> = {
            let mut kept: Vec<usize> = order[..rank].to_vec();
            kept.sort_unstable();
            kept
        };
        let dropped: Vec<usize> = order[rank..].to_vec();

        if !drop_collinear || dropped.iter().any(|&j| j < protected) {
            let j = dropped.iter().copied().min().unwrap_or(0);
            return Err(EconError::RankDeficient { column: names[j].clone() });
        }

        let sub_names: Vec<String> = kept.iter().map(|&j| names[j].clone()).collect();
        let sub_cols: Vec<&[f64]> = kept.iter().map(|&j| columns[j]).collect();
        let mut fit = qr_least_squares(y, &sub_names, &sub_cols, false, 0)?;
        fit.dropped = dropped.iter().map(|&j| names[j].clone()).collect();
        fit.dropped.sort();
        return Ok(fit);
    }

    // Full rank: X P = Q R with R nonsingular.
    let yv = DVector::from_column_slice(y);
    let q = qr.q();
    let r = qr.r();
    let qty = q.transpose() * &yv;
    let gamma = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| EconError::RankDeficient { column: names[0].clone() })?;
    // beta = P * gamma (undo the column pivoting).
    let mut beta = gamma.clone();
    qr.p().inv_permute_rows(&mut beta);

    // (X'X)^-1 = P R^-1 R^-T P'.
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| EconError::RankDeficient { column: names[0].clone() })?;
    let mut xtx_inv = &r_inv * r_inv.transpose();
    qr.p().inv_permute_rows(&mut xtx_inv);
    let mut xtx_inv_t = xtx_inv.transpose();
    qr.p().inv_permute_rows(&mut xtx_inv_t);
    let xtx_inv = xtx_inv_t; // symmetric; rows and columns both un-permuted

    let fitted_v = &xmat * &beta;
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted_v[i]).collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();

    Ok(QrFit {
        names: names.to_vec(),
        coef: beta.iter().copied().collect(),
        xtx_inv_diag: (0..k).map(|j| xtx_inv[(j, j)]).collect(),
        fitted: fitted_v.iter().copied().collect(),
        residuals,
        rss,
        dropped: Vec::new(),
    })
}
