//! Search-attention regressions: weekly returns on one to three week lags
//! of both search terms jointly.
//!
//! ```text
//! cargo run --example attention
//! ```

use std::path::PathBuf;

use defix::pipeline::{load_inputs, render_text, table_attention, RunConfig};

fn main() {
    let config_path =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/defix.toml");
    let config = RunConfig::load(&config_path).expect("bundled fixture config");
    let data = load_inputs(&config).expect("fixture inputs");
    let table = table_attention(&data, &config).expect("attention table");
    print!("{}", render_text(&table));
}
