//! Command implementations: load inputs, build the index, run the analysis
//! suite, and write table artifacts plus a manifest.
//!
//! Every command writes `<out>/<table_id>.csv` and `<out>/<table_id>.txt`
//! for each table it owns, then `<out>/manifest.json` with input hashes, a
//! config echo and per-artifact hashes. A failed table is recorded in the
//! manifest instead of aborting the run; the process exit status reflects
//! whether any table failed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::econometrics::{
    make_lags, ols, panel_ols_time_effects, pearson_matrix, EconError, EntitySeries, OlsOptions,
};
use crate::features::{log_growth, loglog_fit, valuation_ratio};
use crate::index_engine::{run_index, IndexError, IndexSeries};
use crate::market_data::{
    clean_panel, ingest_attention, ingest_network, ingest_prices, ingest_tvl, AttentionSeries,
    CleanPolicy, CleaningReport, DataError, TokenPanel,
};
use crate::series::{resample, Aggregation, Frequency, TimeSeries};
use crate::stats::{cumulative_returns, simple_returns, summary_stats, ReturnSeries, StatsError};

use super::config::RunConfig;
use super::tables::{
    csv_float, render_csv, render_text, TableArtifact, CORR_COLUMNS, FIG1_COLUMNS, FIG2_COLUMNS,
    REGRESSION_COLUMNS, SUMMARY_COLUMNS,
};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Econ(#[from] EconError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("symbol '{0}' not present in the price panel")]
    MissingSymbol(String),
    #[error("attention term '{0}' not present in the attention file")]
    MissingAttentionTerm(String),
}

/// A table id paired with its build outcome, for partial-success runs.
pub type TableOutcome = (String, Result<TableArtifact, PipelineError>);

fn io_err(context: &str) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { context: context.to_string(), source }
}

/// The CLI surface, one variant per subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    BuildIndex,
    Summary,
    Correlations,
    Lagged(Predictor),
    NetworkSuite,
    Attention,
    Valuation(Frequency),
    Cumulative,
    /// Run every command, valuation at both frequencies.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predictor {
    Btc,
    Eth,
    Crix,
}

impl Predictor {
    pub fn label(&self) -> &'static str {
        match self {
            Predictor::Btc => "btc",
            Predictor::Eth => "eth",
            Predictor::Crix => "crix",
        }
    }

    fn table_id(&self) -> &'static str {
        match self {
            Predictor::Btc => "t3",
            Predictor::Eth => "t4",
            Predictor::Crix => "t5",
        }
    }
}

/// Inputs loaded and cleaned once per run.
pub struct LoadedData {
    pub panel: TokenPanel,
    pub attention: Vec<AttentionSeries>,
    pub cleaning: CleaningReport,
    pub reports: Vec<serde_json::Value>,
}

/// Read, attach, validate and clean all configured inputs.
pub fn load_inputs(config: &RunConfig) -> Result<LoadedData, PipelineError> {
    let prices = fs::File::open(&config.prices_path)
        .map_err(io_err(&config.prices_path.display().to_string()))?;
    let mut panel = ingest_prices(prices)?;

    let mut reports = Vec::new();
    if let Some(path) = &config.tvl_path {
        let file = fs::File::open(path).map_err(io_err(&path.display().to_string()))?;
        let unmatched = ingest_tvl(file, &mut panel)?;
        reports.push(serde_json::json!({ "kind": "unmatched_tvl", "report": unmatched }));
    }
    if let Some(path) = &config.network_path {
        let file = fs::File::open(path).map_err(io_err(&path.display().to_string()))?;
        let unmatched = ingest_network(file, &mut panel)?;
        reports.push(serde_json::json!({ "kind": "unmatched_network", "report": unmatched }));
    }
    let attention = match &config.attention_path {
        Some(path) => {
            let file = fs::File::open(path).map_err(io_err(&path.display().to_string()))?;
            ingest_attention(file)?
        }
        None => Vec::new(),
    };

    let policy =
        if config.forward_fill { CleanPolicy::ForwardFill } else { CleanPolicy::DropMissing };
    let (panel, cleaning) = clean_panel(&panel, policy);
    reports.push(serde_json::json!({ "kind": "cleaning", "report": cleaning }));
    Ok(LoadedData { panel, attention, cleaning, reports })
}

/// The index universe: every panel symbol except the benchmarks.
fn index_universe(panel: &TokenPanel, config: &RunConfig) -> TokenPanel {
    let mut universe = panel.clone();
    for symbol in config.benchmarks.symbols() {
        universe.remove_symbol(&symbol);
    }
    universe
}

/// Build the index over the non-benchmark universe.
pub fn build_index(data: &LoadedData, config: &RunConfig) -> Result<IndexSeries, PipelineError> {
    let universe = index_universe(&data.panel, config);
    Ok(run_index(&universe, &config.index)?)
}

/// Returns of a level series at the requested frequency.
fn returns_at(levels: &TimeSeries, freq: Frequency) -> Result<ReturnSeries, PipelineError> {
    let daily = simple_returns(levels)?;
    Ok(match freq {
        Frequency::Daily => daily,
        coarser => daily.resample(coarser),
    })
}

/// Price returns of one symbol at the requested frequency.
fn symbol_returns(
    panel: &TokenPanel,
    symbol: &str,
    freq: Frequency,
) -> Result<ReturnSeries, PipelineError> {
    if !panel.contains_symbol(symbol) {
        return Err(PipelineError::MissingSymbol(symbol.to_string()));
    }
    returns_at(&panel.prices(symbol), freq)
}

/// The major-token list: explicit when configured, otherwise the top
/// `major_count` by average market cap over the trailing window.
pub fn major_tokens(panel: &TokenPanel, config: &RunConfig) -> Vec<String> {
    if let Some(list) = &config.major_tokens {
        return list.clone();
    }
    let dates = panel.all_dates();
    let Some(&end) = dates.last() else {
        return Vec::new();
    };
    let start = end - chrono::Duration::days(config.major_window_days as i64 - 1);
    let benchmarks = config.benchmarks.symbols();
    let mut ranked: Vec<(String, f64)> = Vec::new();
    for symbol in panel.symbols() {
        if benchmarks.iter().any(|b| b == symbol) {
            continue;
        }
        let obs = panel.observations(symbol).unwrap();
        let caps: Vec<f64> = obs
            .range(start..=end)
            .filter_map(|(_, o)| o.market_cap)
            .collect();
        if caps.is_empty() {
            continue;
        }
        ranked.push((symbol.to_string(), caps.iter().sum::<f64>() / caps.len() as f64));
    }
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    ranked.into_iter().take(config.major_count).map(|(s, _)| s).collect()
}

/// Per-date cross-sectional mean over whichever series have that date.
fn cross_sectional_mean(series: &[TimeSeries], frequency: Frequency) -> TimeSeries {
    let mut sums: BTreeMap<NaiveDate, (f64, usize)> = BTreeMap::new();
    for s in series {
        for (date, value) in s.iter() {
            let e = sums.entry(date).or_insert((0.0, 0));
            e.0 += value;
            e.1 += 1;
        }
    }
    TimeSeries::from_rows(frequency, sums.into_iter().map(|(d, (s, c))| (d, s / c as f64)))
}

/// Market-level daily mean of a raw per-token field.
fn market_field_level(panel: &TokenPanel, field: fn(&crate::market_data::Observation) -> Option<f64>) -> TimeSeries {
    let series: Vec<TimeSeries> = panel
        .symbols()
        .map(|s| panel.field_series(s, field))
        .filter(|s| !s.is_empty())
        .collect();
    cross_sectional_mean(&series, Frequency::Daily)
}

/// Market-level daily mean of per-token log growths of a field.
fn market_field_growth(panel: &TokenPanel, field: fn(&crate::market_data::Observation) -> Option<f64>) -> TimeSeries {
    let series: Vec<TimeSeries> = panel
        .symbols()
        .map(|s| log_growth(&panel.field_series(s, field)).series)
        .filter(|s| !s.is_empty())
        .collect();
    cross_sectional_mean(&series, Frequency::Daily)
}

/// Weekly (or monthly) sum of a daily log-growth series.
fn growth_at(daily_growth: &TimeSeries, freq: Frequency) -> TimeSeries {
    match freq {
        Frequency::Daily => daily_growth.clone(),
        coarser => resample(daily_growth, coarser, Aggregation::Sum),
    }
}

fn attention_series<'a>(
    data: &'a LoadedData,
    term: &str,
) -> Result<&'a AttentionSeries, PipelineError> {
    data.attention
        .iter()
        .find(|s| s.term == term)
        .ok_or_else(|| PipelineError::MissingAttentionTerm(term.to_string()))
}

// ---------------------------------------------------------------------------
// Table builders
// ---------------------------------------------------------------------------

/// Table t1: summary statistics in three panels.
pub fn table_summary(data: &LoadedData, config: &RunConfig) -> Result<TableArtifact, PipelineError> {
    let mut table = TableArtifact::new("t1", "Summary statistics", SUMMARY_COLUMNS);
    let panel = &data.panel;

    // Panel A: market-level network variables, daily.
    let specs: [(&str, &str, fn(&crate::market_data::Observation) -> Option<f64>); 3] = [
        ("address_count", "count", |o| o.address_count),
        ("transaction_count", "count", |o| o.transaction_count),
        ("tvl", "usd", |o| o.tvl),
    ];
    for (name, units, field) in specs {
        let level = market_field_level(panel, field);
        if level.len() >= 4 {
            let row = summary_stats(&level.values().collect::<Vec<_>>(), false)?;
            table.push_summary_row("A", "daily", name, units, &row);
        }
        let growth = market_field_growth(panel, field);
        if growth.len() >= 4 {
            let row = summary_stats(&growth.values().collect::<Vec<_>>(), false)?;
            table.push_summary_row("A", "daily", &format!("d_{name}"), "log_diff", &row);
        }
    }

    // Panel B: attention levels, weekly. Skipped when no attention file is
    // configured; a configured term missing from the file is an error.
    if !data.attention.is_empty() {
        for (term, label) in config.attention_terms.iter().zip(&config.attention_labels) {
            let series = attention_series(data, term)?;
            let values: Vec<f64> = series.as_series().values().collect();
            let row = summary_stats(&values, false)?;
            table.push_summary_row("B", "weekly", label, "index_0_100", &row);
        }
    }

    // Panel C: percent-scaled return statistics with Sharpe.
    let index = build_index(data, config)?;
    let names = [
        ("DeFiX", None),
        ("CRIX", Some(config.benchmarks.crix.clone())),
        ("BTC", Some(config.benchmarks.btc.clone())),
        ("ETH", Some(config.benchmarks.eth.clone())),
    ];
    for freq in [Frequency::Daily, Frequency::Weekly, Frequency::Monthly] {
        for (label, symbol) in &names {
            let returns = match symbol {
                None => returns_at(&index.levels, freq)?,
                Some(sym) => symbol_returns(panel, sym, freq)?,
            };
            let values = returns.values();
            let mut row = summary_stats(&values, true)?;
            // Fractions internally; the table prints percent.
            row.mean *= 100.0;
            row.sd *= 100.0;
            row.max *= 100.0;
            row.min *= 100.0;
            table.push_summary_row("C", &freq.to_string(), label, "percent", &row);
        }
    }
    table.notes.push("panel C values are percent; sharpe is mean/sd (unitless)".to_string());
    Ok(table)
}

/// Tables t2 and t6: correlation matrices.
pub fn table_correlations(data: &LoadedData, config: &RunConfig) -> Vec<TableOutcome> {
    let panel = &data.panel;

    let t2 = (|| -> Result<TableArtifact, PipelineError> {
        let index = build_index(data, config)?;
        let defix = returns_at(&index.levels, Frequency::Weekly)?;
        let eth = symbol_returns(panel, &config.benchmarks.eth, Frequency::Weekly)?;
        let btc = symbol_returns(panel, &config.benchmarks.btc, Frequency::Weekly)?;
        let crix = symbol_returns(panel, &config.benchmarks.crix, Frequency::Weekly)?;
        let m = pearson_matrix(&[
            ("DeFiX", defix.as_series()),
            ("ETH", eth.as_series()),
            ("BTC", btc.as_series()),
            ("CRIX", crix.as_series()),
        ])?;
        let mut t = TableArtifact::new(
            "t2",
            "Pearson correlation, market index vs benchmark returns (weekly)",
            CORR_COLUMNS,
        );
        t.push_corr_matrix(&m);
        Ok(t)
    })();

    let t6 = (|| -> Result<TableArtifact, PipelineError> {
        let g_trans =
            growth_at(&market_field_growth(panel, |o| o.transaction_count), Frequency::Weekly);
        let g_addr = growth_at(&market_field_growth(panel, |o| o.address_count), Frequency::Weekly);
        let g_tvl = growth_at(&market_field_growth(panel, |o| o.tvl), Frequency::Weekly);
        let m = pearson_matrix(&[
            ("d_transaction", &g_trans),
            ("d_address", &g_addr),
            ("d_tvl", &g_tvl),
        ])?;
        let mut t = TableArtifact::new(
            "t6",
            "Pearson correlation among weekly network growth variables",
            CORR_COLUMNS,
        );
        t.push_corr_matrix(&m);
        Ok(t)
    })();

    vec![("t2".into(), t2), ("t6".into(), t6)]
}

/// Tables t3/t4/t5: returns on one and two week lagged predictor returns.
pub fn table_lagged(
    data: &LoadedData,
    config: &RunConfig,
    predictor: Predictor,
) -> Result<TableArtifact, PipelineError> {
    let panel = &data.panel;
    let index = build_index(data, config)?;
    let symbol = match predictor {
        Predictor::Btc => &config.benchmarks.btc,
        Predictor::Eth => &config.benchmarks.eth,
        Predictor::Crix => &config.benchmarks.crix,
    };
    let x = symbol_returns(panel, symbol, Frequency::Weekly)?;
    let label = predictor.label();

    let mut table = TableArtifact::new(
        predictor.table_id(),
        &format!("Predicting power of {label} weekly returns"),
        REGRESSION_COLUMNS,
    );
    let mut dependents = vec![("DeFiX".to_string(), returns_at(&index.levels, Frequency::Weekly)?)];
    for token in major_tokens(panel, config) {
        dependents.push((token.clone(), symbol_returns(panel, &token, Frequency::Weekly)?));
    }
    for (row_label, y) in &dependents {
        let design = make_lags(y.as_series(), &[(label, x.as_series())], &config.lagged_lags)?;
        let fit = ols(&design.y, &design.design(), OlsOptions::default())?;
        table.push_fit(row_label, &fit);
    }
    Ok(table)
}

/// One growth panel table (t8..t13): token returns on lagged growth.
fn growth_panel_table(
    panel: &TokenPanel,
    table_id: &str,
    growth_label: &str,
    set_label: &str,
    symbols: &[String],
    field: fn(&crate::market_data::Observation) -> Option<f64>,
    lags: &[u32],
) -> Result<TableArtifact, PipelineError> {
    let freq = Frequency::Weekly;
    let mut entities = BTreeMap::new();
    for symbol in symbols {
        let growth_daily = log_growth(&panel.field_series(symbol, field)).series;
        if growth_daily.is_empty() {
            continue;
        }
        let x = growth_at(&growth_daily, freq);
        let y = match returns_at(&panel.prices(symbol), freq) {
            Ok(r) => r,
            Err(_) => continue, // token too short for returns at all
        };
        entities.insert(symbol.clone(), EntitySeries { y: y.into_series(), x });
    }
    let fit = panel_ols_time_effects(&entities, lags, growth_label)?;
    let mut table = TableArtifact::new(
        table_id,
        &format!("Panel of token returns on lagged {growth_label} ({set_label})"),
        REGRESSION_COLUMNS,
    );
    table.push_panel_fit(set_label, &fit);
    table.notes.push(format!(
        "time effects included ({} dummies), {} entities",
        fit.time_dummies, fit.entities
    ));
    Ok(table)
}

/// Tables t7 through t13.
pub fn table_network_suite(data: &LoadedData, config: &RunConfig) -> Vec<TableOutcome> {
    let panel = &data.panel;
    let freq = Frequency::Weekly;

    // t7: contemporaneous exposure of index returns to market-level growths.
    let t7 = (|| -> Result<TableArtifact, PipelineError> {
        let index = build_index(data, config)?;
        let defix = returns_at(&index.levels, freq)?;
        let g_trans = growth_at(&market_field_growth(panel, |o| o.transaction_count), freq);
        let g_addr = growth_at(&market_field_growth(panel, |o| o.address_count), freq);
        let g_tvl = growth_at(&market_field_growth(panel, |o| o.tvl), freq);
        let mut t7 = TableArtifact::new(
            "t7",
            "Index return exposure to network growth variables (weekly)",
            REGRESSION_COLUMNS,
        );
        let models: [(&str, Vec<(&str, &TimeSeries)>); 4] = [
            ("trans", vec![("d_transaction", &g_trans)]),
            ("address", vec![("d_address", &g_addr)]),
            ("tvl", vec![("d_tvl", &g_tvl)]),
            ("all", vec![
                ("d_transaction", &g_trans),
                ("d_address", &g_addr),
                ("d_tvl", &g_tvl),
            ]),
        ];
        for (row_label, regressors) in &models {
            let (y, design) = contemporaneous_design(&defix, regressors)?;
            let fit = ols(&y, &design, OlsOptions::default())?;
            t7.push_fit(row_label, &fit);
        }
        Ok(t7)
    })();

    let mut out = vec![("t7".to_string(), t7)];

    // Panels t8..t13: per-token growth lags, all-token and major sets.
    let benchmarks = config.benchmarks.symbols();
    let strip = |mut list: Vec<String>| -> Vec<String> {
        list.retain(|s| !benchmarks.contains(s));
        list
    };
    let majors = strip(major_tokens(panel, config));
    let with_tvl = strip(panel.symbols_with_tvl());
    let with_network = strip(panel.symbols_with_network());

    let tvl_field: fn(&crate::market_data::Observation) -> Option<f64> = |o| o.tvl;
    let trans_field: fn(&crate::market_data::Observation) -> Option<f64> = |o| o.transaction_count;
    let addr_field: fn(&crate::market_data::Observation) -> Option<f64> = |o| o.address_count;

    let panels: [(&str, &str, &str, &[String], fn(&crate::market_data::Observation) -> Option<f64>); 6] = [
        ("t8", "d_tvl", "all tokens with TVL", &with_tvl, tvl_field),
        ("t9", "d_tvl", "major tokens", &majors, tvl_field),
        ("t10", "d_transaction", "all tokens with network data", &with_network, trans_field),
        ("t11", "d_transaction", "major tokens", &majors, trans_field),
        ("t12", "d_address", "all tokens with network data", &with_network, addr_field),
        ("t13", "d_address", "major tokens", &majors, addr_field),
    ];
    for (table_id, growth_label, set_label, symbols, field) in panels {
        let result = growth_panel_table(
            panel,
            table_id,
            growth_label,
            set_label,
            symbols,
            field,
            &config.panel_lags,
        );
        out.push((table_id.to_string(), result));
    }
    out
}

/// Align an outcome with contemporaneous regressors on shared dates.
fn contemporaneous_design(
    y: &ReturnSeries,
    regressors: &[(&str, &TimeSeries)],
) -> Result<(Vec<f64>, crate::econometrics::Design), PipelineError> {
    let mut yv = Vec::new();
    let mut cols: Vec<(String, Vec<f64>)> =
        regressors.iter().map(|(n, _)| (n.to_string(), Vec::new())).collect();
    for (date, value) in y.as_series().iter() {
        let row: Option<Vec<f64>> = regressors.iter().map(|(_, s)| s.get(date)).collect();
        if let Some(row) = row {
            yv.push(value);
            for (col, v) in cols.iter_mut().zip(row) {
                col.1.push(v);
            }
        }
    }
    if yv.is_empty() {
        return Err(EconError::SeriesTooShort.into());
    }
    Ok((yv, crate::econometrics::Design::from_columns(cols)))
}

/// Table t14: returns on one-to-three week lags of both attention terms.
pub fn table_attention(
    data: &LoadedData,
    config: &RunConfig,
) -> Result<TableArtifact, PipelineError> {
    let panel = &data.panel;
    let index = build_index(data, config)?;
    let mut regressors: Vec<(String, TimeSeries)> = Vec::new();
    for (term, label) in config.attention_terms.iter().zip(&config.attention_labels) {
        regressors.push((label.clone(), attention_series(data, term)?.as_series()));
    }
    let named: Vec<(&str, &TimeSeries)> =
        regressors.iter().map(|(l, s)| (l.as_str(), s)).collect();

    let mut table = TableArtifact::new(
        "t14",
        "Predicting power of search attention (weekly)",
        REGRESSION_COLUMNS,
    );
    let mut dependents = vec![("DeFiX".to_string(), returns_at(&index.levels, Frequency::Weekly)?)];
    for token in major_tokens(panel, config) {
        dependents.push((token.clone(), symbol_returns(panel, &token, Frequency::Weekly)?));
    }
    for (row_label, y) in &dependents {
        let design = make_lags(y.as_series(), &named, &config.attention_lags)?;
        let fit = ols(&design.y, &design.design(), OlsOptions::default())?;
        table.push_fit(row_label, &fit);
    }
    Ok(table)
}

/// Tables t15/t16 (weekly) or d1/d2 (monthly).
pub fn table_valuation(data: &LoadedData, config: &RunConfig, freq: Frequency) -> Vec<TableOutcome> {
    let panel = &data.panel;
    let (id_all, id_major) = match freq {
        Frequency::Monthly => ("d1", "d2"),
        _ => ("t15", "t16"),
    };
    let benchmarks = config.benchmarks.symbols();
    let with_tvl: Vec<String> = panel
        .symbols_with_tvl()
        .into_iter()
        .filter(|s| !benchmarks.contains(s))
        .collect();
    let majors: Vec<String> = major_tokens(panel, config)
        .into_iter()
        .filter(|s| with_tvl.contains(s))
        .collect();

    let ratio_of = |symbol: &String| -> Option<TimeSeries> {
        let tvl = panel.field_series(symbol, |o| o.tvl);
        let mcap = panel.field_series(symbol, |o| o.market_cap);
        let ratio = valuation_ratio(&tvl, &mcap).series;
        if ratio.is_empty() {
            None
        } else {
            Some(resample(&ratio, freq, Aggregation::Last))
        }
    };

    let mut out = Vec::new();
    for (table_id, set_label, symbols) in
        [(id_all, "all tokens with TVL", &with_tvl), (id_major, "major tokens", &majors)]
    {
        let result = (|| -> Result<TableArtifact, PipelineError> {
            let mut entities = BTreeMap::new();
            for symbol in symbols {
                let Some(x) = ratio_of(symbol) else { continue };
                let Ok(y) = returns_at(&panel.prices(symbol), freq) else { continue };
                entities.insert(symbol.clone(), EntitySeries { y: y.into_series(), x });
            }
            let fit = panel_ols_time_effects(&entities, &config.panel_lags, "val_ratio")?;
            let mut table = TableArtifact::new(
                table_id,
                &format!("Predicting power of the TVL-to-market ratio ({set_label}, {freq})"),
                REGRESSION_COLUMNS,
            );
            table.push_panel_fit(set_label, &fit);
            table.notes.push(format!(
                "time effects included ({} dummies), {} entities",
                fit.time_dummies, fit.entities
            ));
            Ok(table)
        })();
        out.push((table_id.to_string(), result));
    }
    out
}

/// Figure 2 export: pooled weekly (ln TVL, ln market cap) scatter plus fit.
pub fn table_fig2(data: &LoadedData, config: &RunConfig) -> Result<TableArtifact, PipelineError> {
    let panel = &data.panel;
    let benchmarks = config.benchmarks.symbols();
    let pairs: Vec<(String, TimeSeries, TimeSeries)> = panel
        .symbols_with_tvl()
        .into_iter()
        .filter(|s| !benchmarks.contains(s))
        .map(|symbol| {
            let tvl = resample(
                &panel.field_series(&symbol, |o| o.tvl),
                Frequency::Weekly,
                Aggregation::Last,
            );
            let mcap = resample(
                &panel.field_series(&symbol, |o| o.market_cap),
                Frequency::Weekly,
                Aggregation::Last,
            );
            (symbol, tvl, mcap)
        })
        .collect();
    let fit = loglog_fit(&pairs)?;
    let mut table = TableArtifact::new(
        "fig2",
        "Log TVL vs log market cap (weekly observations)",
        FIG2_COLUMNS,
    );
    for (symbol, date, ln_tvl, ln_mcap) in &fit.points {
        table.rows.push(vec![
            symbol.clone(),
            date.to_string(),
            csv_float(*ln_tvl),
            csv_float(*ln_mcap),
        ]);
    }
    table.notes.push(format!(
        "ols ln(mcap) = {:.4} + {:.4} ln(tvl), r2 = {:.4}, n = {}",
        fit.fit.coef[0], fit.fit.coef[1], fit.fit.r2, fit.fit.n
    ));
    Ok(table)
}

/// Figure 1 export: cumulative daily returns over the common window.
pub fn table_cumulative(
    data: &LoadedData,
    config: &RunConfig,
) -> Result<TableArtifact, PipelineError> {
    let panel = &data.panel;
    let index = build_index(data, config)?;
    let series = [
        returns_at(&index.levels, Frequency::Daily)?,
        symbol_returns(panel, &config.benchmarks.btc, Frequency::Daily)?,
        symbol_returns(panel, &config.benchmarks.eth, Frequency::Daily)?,
        symbol_returns(panel, &config.benchmarks.crix, Frequency::Daily)?,
    ];

    // Trim to dates where every series has a return.
    let common: Vec<NaiveDate> = series[0]
        .as_series()
        .dates()
        .filter(|d| series.iter().all(|s| s.as_series().get(*d).is_some()))
        .collect();
    let trimmed: Vec<TimeSeries> = series
        .iter()
        .map(|s| {
            TimeSeries::from_rows(
                Frequency::Daily,
                common.iter().map(|d| (*d, s.as_series().get(*d).unwrap())),
            )
        })
        .collect();
    let cumulative: Vec<TimeSeries> = trimmed
        .iter()
        .map(|s| cumulative_returns(&ReturnSeries::new(s.clone()).expect("validated returns")))
        .collect();

    let mut table = TableArtifact::new(
        "fig1",
        "Cumulative daily returns over the common window",
        FIG1_COLUMNS,
    );
    for date in &common {
        table.rows.push(vec![
            date.to_string(),
            csv_float(cumulative[0].get(*date).unwrap()),
            csv_float(cumulative[1].get(*date).unwrap()),
            csv_float(cumulative[2].get(*date).unwrap()),
            csv_float(cumulative[3].get(*date).unwrap()),
        ]);
    }
    Ok(table)
}

/// Feature export: date,symbol,feature,value at the analysis frequency.
pub fn feature_export(data: &LoadedData, config: &RunConfig) -> String {
    let panel = &data.panel;
    let freq = config.frequency;
    let benchmarks = config.benchmarks.symbols();
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["date", "symbol", "feature", "value"]).expect("in-memory write");
    let fields: [(&str, fn(&crate::market_data::Observation) -> Option<f64>); 3] = [
        ("d_address", |o| o.address_count),
        ("d_transaction", |o| o.transaction_count),
        ("d_tvl", |o| o.tvl),
    ];
    for symbol in panel.symbols().map(str::to_string).collect::<Vec<_>>() {
        if benchmarks.contains(&symbol) {
            continue;
        }
        for (feature, field) in fields {
            let daily = log_growth(&panel.field_series(&symbol, field)).series;
            for (date, value) in growth_at(&daily, freq).iter() {
                w.write_record([date.to_string(), symbol.clone(), feature.to_string(), csv_float(value)])
                    .expect("in-memory write");
            }
        }
        let tvl = panel.field_series(&symbol, |o| o.tvl);
        let mcap = panel.field_series(&symbol, |o| o.market_cap);
        let ratio = valuation_ratio(&tvl, &mcap).series;
        if !ratio.is_empty() {
            for (date, value) in resample(&ratio, freq, Aggregation::Last).iter() {
                w.write_record([
                    date.to_string(),
                    symbol.clone(),
                    "val_ratio".to_string(),
                    csv_float(value),
                ])
                .expect("in-memory write");
            }
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

// ---------------------------------------------------------------------------
// Runner: artifact writing and the manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct ArtifactRecord {
    pub table_id: String,
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureRecord {
    pub table_id: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub config_echo: String,
    pub artifacts: Vec<ArtifactRecord>,
    pub failures: Vec<FailureRecord>,
}

/// Everything a run produced, plus where the manifest landed.
#[derive(Debug)]
pub struct RunReport {
    pub artifacts: Vec<ArtifactRecord>,
    pub failures: Vec<FailureRecord>,
    pub manifest_path: PathBuf,
}

impl RunReport {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").expect("writing to a string");
    }
    out
}

struct Writer {
    out_dir: PathBuf,
    artifacts: Vec<ArtifactRecord>,
    failures: Vec<FailureRecord>,
}

impl Writer {
    fn new(out_dir: &Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(out_dir).map_err(io_err(&out_dir.display().to_string()))?;
        Ok(Writer { out_dir: out_dir.to_path_buf(), artifacts: Vec::new(), failures: Vec::new() })
    }

    fn write_file(&mut self, table_id: &str, name: &str, bytes: &[u8]) -> Result<(), PipelineError> {
        let path = self.out_dir.join(name);
        fs::write(&path, bytes).map_err(io_err(&path.display().to_string()))?;
        self.artifacts.push(ArtifactRecord {
            table_id: table_id.to_string(),
            file: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    fn write_table(&mut self, table: &TableArtifact) -> Result<(), PipelineError> {
        let csv = render_csv(table);
        let txt = render_text(table);
        self.write_file(&table.table_id, &format!("{}.csv", table.table_id), csv.as_bytes())?;
        self.write_file(&table.table_id, &format!("{}.txt", table.table_id), txt.as_bytes())
    }

    fn record(&mut self, table_id: &str, result: Result<TableArtifact, PipelineError>) {
        let outcome = result.and_then(|table| self.write_table(&table));
        if let Err(e) = outcome {
            self.failures
                .push(FailureRecord { table_id: table_id.to_string(), error: e.to_string() });
        }
    }

    fn record_each(&mut self, outcomes: Vec<TableOutcome>) {
        for (table_id, result) in outcomes {
            self.record(&table_id, result);
        }
    }
}

/// Serializable flat view of one epoch for the history export.
#[derive(Serialize)]
struct EpochView<'a> {
    effective_date: NaiveDate,
    divisor: f64,
    reason: &'a crate::index_engine::EpochReason,
    members: &'a [crate::index_engine::Member],
}

fn index_artifacts(
    writer: &mut Writer,
    data: &LoadedData,
    config: &RunConfig,
) -> Result<(), PipelineError> {
    let index = build_index(data, config)?;

    let mut csv = String::from("date,level,epoch_id\n");
    for ((date, level), epoch_id) in index.levels.iter().zip(&index.epoch_ids) {
        csv.push_str(&format!("{date},{},{epoch_id}\n", csv_float(level)));
    }
    writer.write_file("index", "index.csv", csv.as_bytes())?;

    let views: Vec<EpochView> = index
        .epochs
        .iter()
        .map(|e| EpochView {
            effective_date: e.constituents.effective_date,
            divisor: e.divisor.value,
            reason: &e.reason,
            members: &e.constituents.members,
        })
        .collect();
    let json = serde_json::to_string_pretty(&views).expect("serializable");
    writer.write_file("epochs", "epochs.json", json.as_bytes())?;

    let mut lines = String::new();
    for report in &data.reports {
        lines.push_str(&serde_json::to_string(report).expect("serializable"));
        lines.push('\n');
    }
    writer.write_file("reports", "reports.jsonl", lines.as_bytes())?;
    Ok(())
}

/// Run one command (or all of them) against a loaded configuration.
pub fn run(config: &RunConfig, command: Command) -> Result<RunReport, PipelineError> {
    let data = load_inputs(config)?;
    let mut writer = Writer::new(&config.output_dir)?;

    let wants = |c: Command| command == c || command == Command::All;

    if wants(Command::BuildIndex) {
        if let Err(e) = index_artifacts(&mut writer, &data, config) {
            writer.failures.push(FailureRecord { table_id: "index".into(), error: e.to_string() });
        }
    }
    if wants(Command::Summary) {
        let result = table_summary(&data, config);
        writer.record("t1", result);
    }
    if wants(Command::Correlations) {
        let outcomes = table_correlations(&data, config);
        writer.record_each(outcomes);
    }
    for predictor in [Predictor::Btc, Predictor::Eth, Predictor::Crix] {
        if wants(Command::Lagged(predictor)) {
            let result = table_lagged(&data, config, predictor);
            writer.record(predictor.table_id(), result);
        }
    }
    if wants(Command::NetworkSuite) {
        let outcomes = table_network_suite(&data, config);
        writer.record_each(outcomes);
        let features = feature_export(&data, config);
        if let Err(e) = writer.write_file("features", "features.csv", features.as_bytes()) {
            writer.failures.push(FailureRecord { table_id: "features".into(), error: e.to_string() });
        }
    }
    if wants(Command::Attention) {
        let result = table_attention(&data, config);
        writer.record("t14", result);
    }
    let valuation_weekly = wants(Command::Valuation(Frequency::Weekly));
    let valuation_monthly = wants(Command::Valuation(Frequency::Monthly));
    if valuation_weekly {
        let outcomes = table_valuation(&data, config, Frequency::Weekly);
        writer.record_each(outcomes);
    }
    if valuation_monthly {
        let outcomes = table_valuation(&data, config, Frequency::Monthly);
        writer.record_each(outcomes);
    }
    if valuation_weekly || valuation_monthly {
        // The scatter is frequency-independent by convention: weekly points.
        let result = table_fig2(&data, config);
        writer.record("fig2", result);
    }
    if wants(Command::Cumulative) {
        let result = table_cumulative(&data, config);
        writer.record("fig1", result);
    }

    writer.artifacts.sort_by(|a, b| a.file.cmp(&b.file));
    writer.failures.sort_by(|a, b| a.table_id.cmp(&b.table_id));

    let mut inputs = BTreeMap::new();
    for path in [Some(&config.prices_path), config.tvl_path.as_ref(),
                 config.network_path.as_ref(), config.attention_path.as_ref()]
        .into_iter()
        .flatten()
    {
        let bytes = fs::read(path).map_err(io_err(&path.display().to_string()))?;
        inputs.insert(
            path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
            sha256_hex(&bytes),
        );
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: format!("{command:?}"),
        inputs,
        config_echo: config.echo.clone(),
        artifacts: writer.artifacts.clone(),
        failures: writer.failures.clone(),
    };
    let manifest_path = config.output_dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest).expect("serializable");
    fs::write(&manifest_path, body).map_err(io_err(&manifest_path.display().to_string()))?;

    Ok(RunReport { artifacts: writer.artifacts, failures: writer.failures, manifest_path })
}
