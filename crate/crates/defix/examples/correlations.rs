//! Pearson correlation with significance stars, straight from the library
//! API (no pipeline involved).
//!
//! ```text
//! cargo run --example correlations
//! ```

use std::path::PathBuf;

use defix::econometrics::pearson_matrix;
use defix::pipeline::{build_index, load_inputs, RunConfig};
use defix::series::Frequency;
use defix::stats::simple_returns;

fn main() {
    let config_path =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/defix.toml");
    let config = RunConfig::load(&config_path).expect("bundled fixture config");
    let data = load_inputs(&config).expect("fixture inputs");

    let index = build_index(&data, &config).expect("index");
    let weekly = |levels| simple_returns(levels).unwrap().resample(Frequency::Weekly);
    let defix = weekly(&index.levels);
    let btc = weekly(&data.panel.prices("BTC"));
    let eth = weekly(&data.panel.prices("ETH"));
    let crix = weekly(&data.panel.prices("CRIX"));

    let matrix = pearson_matrix(&[
        ("DeFiX", defix.as_series()),
        ("ETH", eth.as_series()),
        ("BTC", btc.as_series()),
        ("CRIX", crix.as_series()),
    ])
    .expect("correlation matrix");

    println!("weekly return correlations (*: 10%, **: 5%, ***: 1%):\n");
    print!("{:8}", "");
    for label in &matrix.labels {
        print!("{label:>12}");
    }
    println!();
    for i in 0..matrix.labels.len() {
        print!("{:8}", matrix.labels[i]);
        for j in 0..=i {
            print!("{:>12}", format!("{:.3}{}", matrix.r[i][j], matrix.stars[i][j]));
        }
        println!();
    }
}
