//! Generate the bundled synthetic fixture: two years of daily token data
//! with TVL and network extensions, plus weekly search attention.
//!
//! The generator is fully seeded, so rerunning it reproduces the committed
//! files byte for byte:
//!
//! ```text
//! cargo run --example make_fixture [-- <output-dir>]
//! ```

use std::fmt::Write as _;
use std::path::PathBuf;

use chrono::{Datelike, Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

const SEED: u64 = 42;
const DEFI_TOKENS: usize = 20;
const TVL_TOKENS: usize = 12;
const NETWORK_TOKENS: usize = 8;

struct Token {
    symbol: String,
    start_day: i64,
    /// Day the price history stops, if the token dies.
    death_day: Option<i64>,
    price: f64,
    supply: f64,
    drift: f64,
    vol: f64,
}

fn main() {
    let out_dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        // Default to <workspace>/fixtures next to this crate.
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
    });
    std::fs::create_dir_all(&out_dir).expect("create fixture directory");

    let mut rng = ChaCha20Rng::seed_from_u64(SEED);
    let start = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap();
    let days: i64 = 730;

    // Benchmarks live over the whole span.
    let mut tokens = vec![
        Token {
            symbol: "BTC".into(),
            start_day: 0,
            death_day: None,
            price: 8000.0,
            supply: 18_000_000.0,
            drift: 0.0015,
            vol: 0.035,
        },
        Token {
            symbol: "ETH".into(),
            start_day: 0,
            death_day: None,
            price: 150.0,
            supply: 110_000_000.0,
            drift: 0.002,
            vol: 0.045,
        },
        Token {
            symbol: "CRIX".into(),
            start_day: 0,
            death_day: None,
            price: 1000.0,
            supply: 1.0,
            drift: 0.0015,
            vol: 0.03,
        },
    ];
    for i in 0..DEFI_TOKENS {
        let symbol = format!("TOK{:02}", i + 1);
        // Eight tokens live from day one; the rest list later.
        let start_day = if i < 8 { 0 } else { 30 * (i as i64 - 7) };
        // Two tokens lose their data feed for good partway through.
        let death_day = match i {
            16 => Some(420),
            18 => Some(560),
            _ => None,
        };
        let price = rng.gen_range(0.05_f64..50.0);
        // Two small caps hover around the eligibility floor.
        let target_mcap = if i >= 14 && i < 16 {
            rng.gen_range(900_000.0_f64..1_300_000.0)
        } else {
            rng.gen_range(5.0e6_f64..500.0e6)
        };
        tokens.push(Token {
            symbol,
            start_day,
            death_day,
            price,
            supply: target_mcap / price,
            drift: rng.gen_range(-0.001_f64..0.004),
            vol: rng.gen_range(0.04_f64..0.09),
        });
    }

    let mut prices = String::from("date,symbol,close_usd,market_cap_usd,volume_usd\n");
    let mut tvl = String::from("date,symbol,tvl_usd\n");
    let mut network = String::from("date,symbol,address_count,transaction_count\n");

    for token in &mut tokens {
        let is_defi = token.symbol.starts_with("TOK");
        let idx: usize =
            if is_defi { token.symbol[3..].parse::<usize>().unwrap() - 1 } else { 0 };
        let has_tvl = is_defi && idx < TVL_TOKENS;
        let has_network = is_defi && idx < NETWORK_TOKENS;

        let mut tvl_ratio = rng.gen_range(0.2_f64..1.5);
        let mut addresses = rng.gen_range(50.0_f64..4000.0);
        let mut transactions = rng.gen_range(200.0_f64..15000.0);

        for day in 0..days {
            let date = start + Duration::days(day);
            if day < token.start_day || token.death_day.map_or(false, |d| day >= d) {
                continue;
            }
            let z: f64 = standard_normal(&mut rng);
            token.price *= (token.drift + token.vol * z).exp();
            let mcap = token.price * token.supply;
            let volume = mcap * rng.gen_range(0.005_f64..0.08);

            // One token reports occasional blank prices (kept as rows so the
            // cleaning stage has something to do).
            let blank_price = token.symbol == "TOK03" && day % 97 == 5;
            if blank_price {
                let _ = writeln!(prices, "{date},{},,{mcap:.2},{volume:.2}", token.symbol);
            } else {
                let _ = writeln!(
                    prices,
                    "{date},{},{:.6},{mcap:.2},{volume:.2}",
                    token.symbol, token.price
                );
            }

            if has_tvl {
                tvl_ratio = (tvl_ratio * (0.002 + 0.03 * standard_normal(&mut rng)).exp())
                    .clamp(0.05, 4.0);
                let _ = writeln!(tvl, "{date},{},{:.2}", token.symbol, mcap * tvl_ratio);
            }
            if has_network {
                addresses = (addresses * (0.001 + 0.08 * standard_normal(&mut rng)).exp())
                    .clamp(0.0, 1.0e6);
                transactions = (transactions * (0.001 + 0.06 * standard_normal(&mut rng)).exp())
                    .clamp(0.0, 5.0e6);
                // Rare outage days report zero activity.
                let (a, t) = if day % 211 == 17 {
                    (0.0, 0.0)
                } else {
                    (addresses.round(), transactions.round())
                };
                let _ = writeln!(network, "{date},{},{a},{t}", token.symbol);
            }
        }
    }

    // A TVL row for a symbol absent from the price panel: stays in the
    // unmatched report.
    let _ = writeln!(tvl, "{},GHOST,123456.00", start + Duration::days(10));

    // Weekly attention, Sunday-anchored, covering the span.
    let mut attention = String::from("week_start,term,interest\n");
    let first_sunday = {
        let mut d = start;
        while d.weekday() != chrono::Weekday::Sun {
            d += Duration::days(1);
        }
        d
    };
    for (term, base) in [("Decentralized finance", 25.0_f64), ("DeFi", 45.0_f64)] {
        let mut level = base;
        let mut week = first_sunday;
        while week < start + Duration::days(days) {
            level = (level + 6.0 * standard_normal(&mut rng)).clamp(1.0, 100.0);
            let _ = writeln!(attention, "{week},{term},{}", level.round() as i64);
            week += Duration::days(7);
        }
    }

    let config = r#"# Bundled synthetic fixture configuration.

[inputs]
prices = "prices.csv"
tvl = "tvl.csv"
network = "network.csv"
attention = "attention.csv"

[index]
min_mcap_usd = 1000000.0
reconstitution = "monthly"

[analysis]
frequency = "weekly"
lagged_lags = [1, 2]
panel_lags = [1, 2, 3, 4]
attention_lags = [1, 2, 3]

[tokens]
benchmarks = { btc = "BTC", eth = "ETH", crix = "CRIX" }
major_count = 15
major_window_days = 100

[attention]
terms = ["Decentralized finance", "DeFi"]
labels = ["dcfin", "defi"]

[output]
dir = "out"
"#;

    for (name, body) in [
        ("prices.csv", &prices),
        ("tvl.csv", &tvl),
        ("network.csv", &network),
        ("attention.csv", &attention),
        ("defix.toml", &config.to_string()),
    ] {
        let path = out_dir.join(name);
        std::fs::write(&path, body).expect("write fixture file");
        println!("wrote {} ({} bytes)", path.display(), body.len());
    }
}

/// Box-Muller from two uniforms; enough for fixture noise.
fn standard_normal(rng: &mut ChaCha20Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}
