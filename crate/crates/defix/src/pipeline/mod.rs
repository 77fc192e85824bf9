//! Configuration-driven command layer that wires the subsystems into the
//! table artifacts and the `defix` binary.

mod config;
mod tables;

pub mod commands;

pub use commands::{
    build_index, feature_export, load_inputs, major_tokens, run, table_attention,
    table_correlations, table_cumulative, table_fig2, table_lagged, table_network_suite,
    table_summary, table_valuation, ArtifactRecord, Command, FailureRecord, LoadedData, Manifest,
    PipelineError, Predictor, RunReport, TableOutcome,
};
pub use config::{Benchmarks, ConfigError, RunConfig};
pub use tables::{
    csv_float, format_3dp, render_csv, render_text, schema_for, TableArtifact, TableRow,
    CORR_COLUMNS, FIG1_COLUMNS, FIG2_COLUMNS, REGRESSION_COLUMNS, SCHEMA_IDS, SUMMARY_COLUMNS,
};
