//! Network-effect suite: index exposure to market-level growth variables
//! and panel regressions of token returns on their own lagged growth.
//!
//! ```text
//! cargo run --example network_panels
//! ```

use std::path::PathBuf;

use defix::pipeline::{load_inputs, render_text, table_network_suite, RunConfig};

fn main() {
    let config_path =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/defix.toml");
    let config = RunConfig::load(&config_path).expect("bundled fixture config");
    let data = load_inputs(&config).expect("fixture inputs");

    for (table_id, result) in table_network_suite(&data, &config) {
        match result {
            Ok(table) => {
                print!("{}", render_text(&table));
                println!();
            }
            Err(e) => println!("{table_id}: skipped ({e})\n"),
        }
    }
}
