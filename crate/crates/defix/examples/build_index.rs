//! Build the index over the bundled fixture and inspect its epochs.
//!
//! ```text
//! cargo run --example build_index
//! ```

use std::path::PathBuf;

use defix::pipeline::{build_index, load_inputs, RunConfig};

fn main() {
    let config_path =
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/defix.toml");
    let config = RunConfig::load(&config_path).expect("bundled fixture config");
    let data = load_inputs(&config).expect("fixture inputs");

    let index = build_index(&data, &config).expect("index construction");
    let first = index.levels.iter().next().unwrap();
    let last = index.levels.iter().last().unwrap();
    println!("levels: {} days, {} -> {}", index.levels.len(), first.0, last.0);
    println!("first level: {}", first.1);
    println!("last level:  {:.4}", last.1);
    println!("epochs: {}", index.epochs.len());

    for epoch in index.epochs.iter().take(3) {
        println!(
            "\nepoch effective {} ({:?}), divisor {:.4}, {} members:",
            epoch.constituents.effective_date,
            epoch.reason,
            epoch.divisor.value,
            epoch.constituents.members.len(),
        );
        for member in &epoch.constituents.members {
            println!("  {}  quantity {:.2}", member.symbol, member.quantity);
        }
    }
}
