//! Predictive regressions of token returns on lagged benchmark returns.
//!
//! ```text
//! cargo run --example lagged_regressions [-- btc|eth|crix]
//! ```

use std::path::PathBuf;

use defix::pipeline::{load_inputs, render_text, table_lagged, Predictor, RunConfig};

fn main() {
    let predictor = match std::env::args().nth(1).as_deref() {
        None | Some("btc") => Predictor::Btc,
        Some("eth") => Predictor::Eth,
        Some("crix") => Predictor::Crix,
        Some(other) => {
            eprintln!("unknown predictor '{other}', expected btc|eth|crix");
            std::process::exit(2);
        }
    };
    let config_path =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/defix.toml");
    let config = RunConfig::load(&config_path).expect("bundled fixture config");
    let data = load_inputs(&config).expect("fixture inputs");
    let table = table_lagged(&data, &config, predictor).expect("lagged regressions");
    print!("{}", render_text(&table));
}
