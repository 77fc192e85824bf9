//! Run configuration: a sectioned key/value file in TOML syntax.
//!
//! Documented keys (all sections optional unless noted):
//!
//! ```toml
//! [inputs]            # required
//! prices = "prices.csv"
//! tvl = "tvl.csv"
//! network = "network.csv"
//! attention = "attention.csv"
//!
//! [index]
//! min_mcap_usd = 1000000.0   # eligibility floor, must be > 0
//! reconstitution = "monthly" # weekly | monthly | quarterly
//! target_count = 15          # optional cap on membership
//! base_value = 1000.0
//!
//! [analysis]
//! frequency = "weekly"       # weekly | monthly, for the valuation tables
//! lagged_lags = [1, 2]       # predictor lags for the lagged-return tables
//! panel_lags = [1, 2, 3, 4]  # lags for every panel regression
//! attention_lags = [1, 2, 3]
//!
//! [tokens]
//! benchmarks = { btc = "BTC", eth = "ETH", crix = "CRIX" }
//! major = ["AAA", "BBB"]     # explicit major-token list (optional)
//! major_count = 15           # else: top-N by 100-day average market cap
//! major_window_days = 100
//!
//! [attention]
//! terms = ["Decentralized finance", "DeFi"]
//! labels = ["dcfin", "defi"]
//!
//! [output]
//! dir = "out"
//! ```
//!
//! Relative input paths resolve against the config file's directory. The
//! `OUTPUT_DIR` environment variable overrides `[output] dir`; the CLI
//! `--out` flag overrides both.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index_engine::{IndexConfig, ReconstitutionCadence};
use crate::series::Frequency;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("input file does not exist: {0}")]
    MissingInput(PathBuf),
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    inputs: RawInputs,
    #[serde(default)]
    index: RawIndex,
    #[serde(default)]
    analysis: RawAnalysis,
    #[serde(default)]
    tokens: RawTokens,
    #[serde(default)]
    attention: RawAttention,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawInputs {
    prices: PathBuf,
    tvl: Option<PathBuf>,
    network: Option<PathBuf>,
    attention: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
struct RawIndex {
    min_mcap_usd: Option<f64>,
    reconstitution: Option<ReconstitutionCadence>,
    target_count: Option<usize>,
    base_value: Option<f64>,
    lookback_days: Option<usize>,
    beta: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    frequency: Option<Frequency>,
    lagged_lags: Option<Vec<u32>>,
    panel_lags: Option<Vec<u32>>,
    attention_lags: Option<Vec<u32>>,
    forward_fill: Option<bool>,
}

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
struct RawTokens {
    benchmarks: Option<BTreeMap<String, String>>,
    major: Option<Vec<String>>,
    major_count: Option<usize>,
    major_window_days: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
struct RawAttention {
    terms: Option<Vec<String>>,
    labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize, Serialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

/// Benchmark symbols; excluded from the index universe.
#[derive(Debug, Clone, Serialize)]
pub struct Benchmarks {
    pub btc: String,
    pub eth: String,
    pub crix: String,
}

impl Benchmarks {
    pub fn symbols(&self) -> Vec<String> {
        vec![self.btc.clone(), self.eth.clone(), self.crix.clone()]
    }
}

/// Fully-resolved run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub prices_path: PathBuf,
    pub tvl_path: Option<PathBuf>,
    pub network_path: Option<PathBuf>,
    pub attention_path: Option<PathBuf>,
    pub index: IndexConfig,
    pub frequency: Frequency,
    pub lagged_lags: Vec<u32>,
    pub panel_lags: Vec<u32>,
    pub attention_lags: Vec<u32>,
    pub forward_fill: bool,
    pub benchmarks: Benchmarks,
    /// Explicit major-token list; when absent the average-market-cap rule
    /// selects `major_count` symbols over `major_window_days`.
    pub major_tokens: Option<Vec<String>>,
    pub major_count: usize,
    pub major_window_days: usize,
    pub attention_terms: Vec<String>,
    pub attention_labels: Vec<String>,
    pub output_dir: PathBuf,
    /// The config file text, echoed into the manifest.
    pub echo: String,
}

impl RunConfig {
    /// Load and validate a config file. See the module docs for the keys.
    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Read { path: path.to_path_buf(), source: e })?;
        let raw: RawConfig = toml::from_str(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));

        let resolve = |p: &PathBuf| -> PathBuf {
            if p.is_absolute() {
                p.clone()
            } else {
                base.join(p)
            }
        };

        let min_mcap = raw.index.min_mcap_usd.unwrap_or(crate::index_engine::DEFAULT_MIN_MCAP);
        if !(min_mcap > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "index.min_mcap_usd must be > 0 (got {min_mcap})"
            )));
        }
        let base_value = raw.index.base_value.unwrap_or(crate::index_engine::DEFAULT_BASE_VALUE);
        if !(base_value > 0.0) {
            return Err(ConfigError::Invalid("index.base_value must be > 0".into()));
        }
        let beta = raw.index.beta.unwrap_or(1.0);
        if !(beta > 0.0) {
            return Err(ConfigError::Invalid("index.beta must be > 0".into()));
        }

        let lagged_lags = raw.analysis.lagged_lags.unwrap_or_else(|| vec![1, 2]);
        let panel_lags = raw.analysis.panel_lags.unwrap_or_else(|| vec![1, 2, 3, 4]);
        let attention_lags = raw.analysis.attention_lags.unwrap_or_else(|| vec![1, 2, 3]);
        for (name, lags) in [
            ("analysis.lagged_lags", &lagged_lags),
            ("analysis.panel_lags", &panel_lags),
            ("analysis.attention_lags", &attention_lags),
        ] {
            if lags.is_empty() {
                return Err(ConfigError::Invalid(format!("{name} must be non-empty")));
            }
            if lags.iter().any(|&l| l == 0) {
                return Err(ConfigError::Invalid(format!("{name} must all be >= 1")));
            }
        }

        let mut bench = BTreeMap::new();
        bench.insert("btc".to_string(), "BTC".to_string());
        bench.insert("eth".to_string(), "ETH".to_string());
        bench.insert("crix".to_string(), "CRIX".to_string());
        if let Some(given) = raw.tokens.benchmarks {
            for (k, v) in given {
                if !bench.contains_key(&k) {
                    return Err(ConfigError::Invalid(format!(
                        "tokens.benchmarks key must be btc/eth/crix, got '{k}'"
                    )));
                }
                bench.insert(k, v);
            }
        }
        let benchmarks = Benchmarks {
            btc: bench["btc"].clone(),
            eth: bench["eth"].clone(),
            crix: bench["crix"].clone(),
        };

        let attention_terms = raw
            .attention
            .terms
            .unwrap_or_else(|| vec!["Decentralized finance".to_string(), "DeFi".to_string()]);
        let attention_labels = raw
            .attention
            .labels
            .unwrap_or_else(|| vec!["dcfin".to_string(), "defi".to_string()]);
        if attention_terms.len() != attention_labels.len() {
            return Err(ConfigError::Invalid(
                "attention.terms and attention.labels must have the same length".into(),
            ));
        }

        let output_dir = match std::env::var_os("OUTPUT_DIR") {
            Some(dir) => PathBuf::from(dir),
            None => raw.output.dir.map(|p| resolve(&p)).unwrap_or_else(|| PathBuf::from("out")),
        };

        let config = RunConfig {
            prices_path: resolve(&raw.inputs.prices),
            tvl_path: raw.inputs.tvl.as_ref().map(resolve),
            network_path: raw.inputs.network.as_ref().map(resolve),
            attention_path: raw.inputs.attention.as_ref().map(resolve),
            index: IndexConfig {
                min_mcap,
                target_count: raw.index.target_count,
                base_value,
                cadence: raw.index.reconstitution.unwrap_or_default(),
                beta,
                lookback_days: raw.index.lookback_days,
            },
            frequency: raw.analysis.frequency.unwrap_or(Frequency::Weekly),
            lagged_lags,
            panel_lags,
            attention_lags,
            forward_fill: raw.analysis.forward_fill.unwrap_or(false),
            benchmarks,
            major_tokens: raw.tokens.major,
            major_count: raw.tokens.major_count.unwrap_or(15),
            major_window_days: raw.tokens.major_window_days.unwrap_or(100),
            attention_terms,
            attention_labels,
            output_dir,
            echo: text,
        };

        for input in [Some(&config.prices_path), config.tvl_path.as_ref(),
                      config.network_path.as_ref(), config.attention_path.as_ref()]
            .into_iter()
            .flatten()
        {
            if !input.exists() {
                return Err(ConfigError::MissingInput(input.clone()));
            }
        }
        Ok(config)
    }
}
