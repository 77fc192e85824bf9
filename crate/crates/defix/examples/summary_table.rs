//! Render the summary-statistics table for the bundled fixture.
//!
//! ```text
//! cargo run --example summary_table
//! ```

use std::path::PathBuf;

use defix::pipeline::{load_inputs, render_text, table_summary, RunConfig};

fn main() {
    let config_path =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/defix.toml");
    let config = RunConfig::load(&config_path).expect("bundled fixture config");
    let data = load_inputs(&config).expect("fixture inputs");
    let table = table_summary(&data, &config).expect("summary table");
    print!("{}", render_text(&table));
}
