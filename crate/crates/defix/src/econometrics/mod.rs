//! Regression and correlation estimators with classical inference.
//!
//! Everything here is pure: estimators take borrowed data and return result
//! structs. Standard errors are classical (homoskedastic); p-values are
//! two-sided Student-t.

mod corr;
mod lags;
mod ols;
mod panel;

use serde::Serialize;
use thiserror::Error;

pub use corr::{pearson, pearson_matrix, pearson_significance, CorrMatrix};
pub use lags::{make_lags, LaggedDesign};
pub use ols::{ols, Design, OlsOptions};
pub use panel::{panel_ols_time_effects, EntitySeries, PanelResult};

/// Errors raised by the estimators.
#[derive(Debug, Error)]
pub enum EconError {
    #[error("design matrix is rank deficient (column '{column}')")]
    RankDeficient { column: String },
    #[error("too few observations: have {n}, need more than {needed}")]
    TooFewObservations { n: usize, needed: usize },
    #[error("column '{column}' has zero variance")]
    ZeroVariance { column: String },
    #[error("series too short for requested lags (n = 0 after alignment)")]
    SeriesTooShort,
    #[error("panel needs at least 2 entities, found {found}")]
    TooFewEntities { found: usize },
}

/// One fitted least-squares model.
#[derive(Debug, Clone, Serialize)]
pub struct RegressionResult {
    /// Regressor labels; "const" first when an intercept was included.
    pub names: Vec<String>,
    pub coef: Vec<f64>,
    pub se: Vec<f64>,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    /// 95% confidence bounds.
    pub ci_low: Vec<f64>,
    pub ci_high: Vec<f64>,
    pub r2: f64,
    /// Observations used after any listwise deletion.
    pub n: usize,
    /// Residual degrees of freedom (n - columns fitted).
    pub df_resid: usize,
    /// Fitted values, aligned with the rows of the design.
    pub fitted: Vec<f64>,
    /// Residuals, aligned with the rows of the design.
    pub residuals: Vec<f64>,
}

impl RegressionResult {
    /// Index of a named term, if present.
    pub fn term(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Two-sided significance marker at the 10/5/1% levels (inclusive).
pub fn significance_stars(p: f64) -> &'static str {
    if p <= 0.01 {
        "***"
    } else if p <= 0.05 {
        "**"
    } else if p <= 0.10 {
        "*"
    } else {
        ""
    }
}

/// Two-sided Student-t p-value for a statistic `t` with `df` degrees of freedom.
pub(crate) fn t_two_sided_p(t: f64, df: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    if !t.is_finite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    2.0 * (1.0 - dist.cdf(t.abs()))
}

/// 97.5% Student-t quantile (for 95% confidence intervals).
pub(crate) fn t_crit_975(df: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    dist.inverse_cdf(0.975)
}
