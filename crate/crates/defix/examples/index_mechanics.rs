//! The index engine's moving parts, by hand: eligibility screening,
//! quantity snapshot, divisor, and a reconstitution that keeps the level
//! continuous.
//!
//! ```text
//! cargo run --example index_mechanics
//! ```

use chrono::NaiveDate;
use defix::index_engine::{compute_divisor, index_level, select_constituents, IndexConfig};
use defix::market_data::{Observation, TokenPanel};
use defix::series::Frequency;

fn obs(price: f64, mcap: f64) -> Observation {
    Observation { price: Some(price), market_cap: Some(mcap), volume: None, ..Default::default() }
}

fn day(d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 6, d).unwrap()
}

fn main() {
    // Six tokens, two days. Prices drift; caps decide membership.
    let mut panel = TokenPanel::new(Frequency::Daily);
    for (symbol, p0, p1, mcap) in [
        ("ALPHA", 10.0, 11.0, 50.0e6),
        ("BRAVO", 2.0, 1.9, 40.0e6),
        ("CHARLIE", 125.0, 130.0, 30.0e6),
        ("DELTA", 0.5, 0.55, 20.0e6),
        ("ECHO", 7.0, 7.7, 10.0e6),
        ("FOXTROT", 3.0, 2.4, 0.9e6), // below the 1M floor: never eligible
    ] {
        panel.insert(symbol, day(1), obs(p0, mcap));
        panel.insert(symbol, day(2), obs(p1, mcap));
    }

    let config = IndexConfig::default();
    let set = select_constituents(&panel, day(1), &config, &[]).expect("5 eligible");
    println!("members on {} (quantity = cap/price):", day(1));
    for m in &set.members {
        println!("  {:8} q = {:.0}", m.symbol, m.quantity);
    }

    let divisor = compute_divisor(&set, &panel, 1000.0).expect("positive capitalization");
    println!("\ndivisor anchoring the base value: {:.2}", divisor.value);
    let level1 = index_level(&set, divisor, &panel, day(1)).unwrap();
    let level2 = index_level(&set, divisor, &panel, day(2)).unwrap();
    println!("level day 1: {level1:.6}");
    println!("level day 2: {level2:.6}");

    // Re-selecting on day 2 re-bases the divisor against the prevailing
    // level, so the switch is invisible in the series.
    let new_set = select_constituents(&panel, day(2), &config, &[]).unwrap();
    let new_divisor = compute_divisor(&new_set, &panel, level2).unwrap();
    let relevel = index_level(&new_set, new_divisor, &panel, day(2)).unwrap();
    println!("level day 2 under the new set: {relevel:.6} (continuous)");
}
