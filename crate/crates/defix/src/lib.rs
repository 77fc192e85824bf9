//! defix: a divisor-chained, value-weighted market index over token panels,
//! plus the econometric toolkit used to analyse its returns.
//!
//! The crate is organised around six subsystems:
//!
//! - [`market_data`]: CSV ingestion, validation, cleaning and resampling
//!   into a canonical [`market_data::TokenPanel`].
//! - [`index_engine`]: eligibility screening, constituent selection and the
//!   divisor-chained index itself.
//! - [`stats`]: simple/cumulative returns and descriptive statistics
//!   (skewness, excess kurtosis, Durbin-Watson, Sharpe).
//! - [`econometrics`]: OLS with classical inference, Pearson correlation
//!   matrices with significance stars, and pooled panel OLS with time
//!   effects.
//! - [`features`]: derived regressors (log-difference growth, TVL-to-market
//!   valuation ratio, log-log size fit).
//! - [`pipeline`]: the configuration-driven command layer that wires the
//!   subsystems into table artifacts; the `defix` binary is a thin wrapper
//!   over it.
//!
//! Most programs only need the prelude:
//!
//! ```
//! use defix::prelude::*;
//! ```

pub mod econometrics;
pub mod features;
pub mod index_engine;
pub mod market_data;
pub mod pipeline;
pub mod series;
pub mod stats;

pub mod prelude {
    pub use crate::econometrics::{
        make_lags, ols, panel_ols_time_effects, pearson_matrix, pearson_significance,
        significance_stars, CorrMatrix, Design, EntitySeries, LaggedDesign, OlsOptions,
        PanelResult, RegressionResult,
    };
    pub use crate::features::{log_growth, loglog_fit, valuation_ratio};
    pub use crate::index_engine::{
        compute_divisor, index_level, run_index, select_constituents, ConstituentSet, Divisor,
        IndexConfig, IndexSeries, ReconstitutionCadence,
    };
    pub use crate::market_data::{
        clean_panel, filter_min_mcap, ingest_attention, ingest_network, ingest_prices,
        ingest_tvl, AttentionSeries, CleanPolicy, Observation, TokenPanel,
    };
    pub use crate::series::{resample, Aggregation, Frequency, TimeSeries};
    pub use crate::stats::{
        cumulative_returns, durbin_watson, simple_returns, summary_stats, ReturnSeries,
        SummaryRow,
    };
}
