//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use chrono::{Datelike, Duration, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use defix::econometrics::{
    make_lags, ols, panel_ols_time_effects, pearson_significance, significance_stars, Design,
    EntitySeries, OlsOptions,
};
use defix::features::log_growth;
use defix::index_engine::{index_level, run_index, IndexConfig};
use defix::market_data::{Observation, TokenPanel};
use defix::pipeline::{format_3dp, run, schema_for, Command, RunConfig, SCHEMA_IDS};
use defix::series::{Frequency, TimeSeries};
use defix::stats::{durbin_watson, summary_stats};

use common::{
    daily_series, fixture_dir, normal, oracle_ols, random_panel, weekly_series, ymd,
};

fn assert_close(actual: f64, expected: f64, rel: f64, what: &str) {
    let scale = expected.abs().max(1.0);
    assert!(
        (actual - expected).abs() <= rel * scale,
        "{what}: {actual} vs {expected} (rel {rel})"
    );
}

fn load_fixture_config(out: &std::path::Path) -> RunConfig {
    let mut config = RunConfig::load(&fixture_dir().join("defix.toml")).expect("fixture config");
    config.output_dir = out.to_path_buf();
    config
}

#[test]
fn criterion_01_index_base_anchoring() {
    let started = Instant::now();

    // Bundled fixture.
    let tmp = tempfile::tempdir().unwrap();
    let config = load_fixture_config(tmp.path());
    let data = defix::pipeline::load_inputs(&config).expect("fixture loads");
    let index = defix::pipeline::build_index(&data, &config).expect("index builds");
    let first = index.levels.values().next().unwrap();
    assert_eq!(first, 1000.0, "first level must be exactly the base value");
    assert_eq!(index.base_value, 1000.0);

    // Arbitrary valid synthetic fixtures.
    for seed in [7u64, 99] {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let panel = random_panel(&mut rng, 12, 120, ymd(2021, 1, 1));
        let series = run_index(&panel, &IndexConfig::default()).expect("synthetic index");
        assert_eq!(series.levels.values().next().unwrap(), 1000.0, "seed {seed}");
    }

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 1.0, "criterion 1 runtime {elapsed:.3}s exceeds 1s");
    println!("PASS criterion 1: first index level is 1000.0 bit-exactly ({elapsed:.3}s)");
}

/// 24 months, 40 tokens, membership flipping between two disjoint halves
/// every month.
fn turnover_panel() -> TokenPanel {
    let mut rng = ChaCha20Rng::seed_from_u64(4242);
    let start = ymd(2020, 1, 1);
    let mut panel = TokenPanel::new(Frequency::Daily);
    let mut prices: Vec<f64> = (0..40).map(|_| rng.gen_range(1.0_f64..50.0)).collect();
    for day in 0..731i64 {
        let date = start + Duration::days(day);
        let month_index = date.year() * 12 + date.month0() as i32;
        let boosted_group = (month_index % 2) as u32;
        for (i, price) in prices.iter_mut().enumerate() {
            *price *= (0.04 * normal(&mut rng)).exp();
            let group = (i as u32) / 20;
            let mcap = if group == boosted_group { 5.0e9 } else { 2.0e6 };
            panel.insert(
                &format!("TOK{i:02}"),
                date,
                Observation {
                    price: Some(*price),
                    market_cap: Some(mcap),
                    volume: Some(0.0),
                    ..Default::default()
                },
            );
        }
    }
    panel
}

#[test]
fn criterion_02_divisor_continuity_under_full_turnover() {
    let started = Instant::now();
    let panel = turnover_panel();
    let config = IndexConfig { target_count: Some(20), ..IndexConfig::default() };
    let series = run_index(&panel, &config).expect("turnover index");

    assert!(series.epochs.len() >= 24, "expected monthly epochs, got {}", series.epochs.len());
    let mut checked = 0;
    for pair in series.epochs.windows(2) {
        let (old, new) = (&pair[0], &pair[1]);
        let date = new.constituents.effective_date;
        let pre = index_level(&old.constituents, old.divisor, &panel, date).unwrap();
        let post = index_level(&new.constituents, new.divisor, &panel, date).unwrap();
        assert!(
            (pre - post).abs() <= 1e-9 * pre.abs(),
            "jump at {date}: {pre} vs {post}"
        );
        // Full turnover: consecutive memberships are disjoint.
        let old_set: BTreeSet<_> = old.constituents.members.iter().map(|m| &m.symbol).collect();
        let new_set: BTreeSet<_> = new.constituents.members.iter().map(|m| &m.symbol).collect();
        assert!(old_set.is_disjoint(&new_set), "memberships overlap at {date}");
        assert_eq!(new_set.len(), 20);
        checked += 1;
    }
    assert!(checked >= 23);

    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 5.0, "criterion 2 runtime {elapsed:.3}s exceeds 5s");
    println!(
        "PASS criterion 2: divisor continuity <= 1e-9 across {checked} full-turnover \
         reconstitutions ({elapsed:.3}s)"
    );
}

#[test]
fn criterion_03_ols_matches_normal_equations_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(3003);
    for trial in 0..1000 {
        let k = rng.gen_range(1..=4usize);
        let n = rng.gen_range(k + 5..=50usize);
        let xcols: Vec<Vec<f64>> =
            (0..k).map(|_| (0..n).map(|_| normal(&mut rng)).collect()).collect();
        let beta: Vec<f64> = (0..=k).map(|_| rng.gen_range(-3.0_f64..3.0)).collect();
        let y: Vec<f64> = (0..n)
            .map(|r| {
                let mut v = beta[0] + normal(&mut rng);
                for j in 0..k {
                    v += beta[j + 1] * xcols[j][r];
                }
                v
            })
            .collect();

        let design = Design::from_columns(
            xcols.iter().enumerate().map(|(j, c)| (format!("x{j}"), c.clone())).collect(),
        );
        let fit = ols(&y, &design, OlsOptions::default()).expect("full-rank fit");
        let oracle = oracle_ols(&y, &xcols);

        for j in 0..=k {
            assert_close(fit.coef[j], oracle.coef[j], 1e-9, &format!("coef {j} trial {trial}"));
            assert_close(fit.se[j], oracle.se[j], 1e-9, &format!("se {j} trial {trial}"));
            assert_close(fit.t[j], oracle.t[j], 1e-9, &format!("t {j} trial {trial}"));
        }
        assert_close(fit.r2, oracle.r2, 1e-9, &format!("r2 trial {trial}"));
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "criterion 3 runtime {elapsed:.3}s exceeds 10s");
    println!("PASS criterion 3: 1000 OLS fits match the normal-equations oracle ({elapsed:.3}s)");
}

#[test]
fn criterion_04_panel_equals_dummy_augmented_ols() {
    let started = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(4004);
    let lags: Vec<u32> = vec![1, 2];
    for trial in 0..100 {
        let entities_n = rng.gen_range(3..=8usize);
        let periods = rng.gen_range(14..=25usize);
        let sunday0 = ymd(2021, 1, 3);
        let tau: Vec<f64> = (0..periods).map(|_| normal(&mut rng)).collect();
        let beta1 = rng.gen_range(-2.0_f64..2.0);
        let beta2 = rng.gen_range(-2.0_f64..2.0);

        let mut entities = std::collections::BTreeMap::new();
        for e in 0..entities_n {
            let start = rng.gen_range(0..periods / 3);
            let len = rng.gen_range(8..=periods - start);
            let xs: Vec<f64> = (0..len + 2).map(|_| normal(&mut rng)).collect();
            let mut x = TimeSeries::new(Frequency::Weekly);
            let mut y = TimeSeries::new(Frequency::Weekly);
            for (i, xv) in xs.iter().enumerate() {
                let t = start + i;
                if t >= periods + 2 {
                    break;
                }
                x.insert(sunday0 + Duration::days(7 * t as i64), *xv);
            }
            for i in 2..xs.len() {
                let t = start + i;
                if t >= periods + 2 {
                    break;
                }
                let noise = 0.5 * normal(&mut rng);
                let tau_t = tau[t % periods];
                y.insert(
                    sunday0 + Duration::days(7 * t as i64),
                    beta1 * xs[i - 1] + beta2 * xs[i - 2] + tau_t + noise,
                );
            }
            entities.insert(format!("E{e:02}"), EntitySeries { y, x });
        }

        let fit = match panel_ols_time_effects(&entities, &lags, "x") {
            Ok(f) => f,
            Err(defix::econometrics::EconError::TooFewObservations { .. })
            | Err(defix::econometrics::EconError::TooFewEntities { .. }) => continue,
            Err(e) => panic!("unexpected panel error: {e}"),
        };

        // Rebuild the stacked dummy design independently.
        let mut rows: Vec<(String, NaiveDate, f64, Vec<f64>)> = Vec::new();
        for (name, series) in &entities {
            for (date, yv) in series.y.iter() {
                let x1 = series.x.get(date - Duration::days(7));
                let x2 = series.x.get(date - Duration::days(14));
                if let (Some(x1), Some(x2)) = (x1, x2) {
                    rows.push((name.clone(), date, yv, vec![x1, x2]));
                }
            }
        }
        rows.sort_by(|a, b| (a.0.as_str(), a.1).cmp(&(b.0.as_str(), b.1)));
        let mut periods_seen: Vec<NaiveDate> = rows.iter().map(|r| r.1).collect();
        periods_seen.sort_unstable();
        periods_seen.dedup();

        let y: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let mut xcols: Vec<Vec<f64>> = vec![
            rows.iter().map(|r| r.3[0]).collect(),
            rows.iter().map(|r| r.3[1]).collect(),
        ];
        for period in &periods_seen[1..] {
            xcols.push(rows.iter().map(|r| if r.1 == *period { 1.0 } else { 0.0 }).collect());
        }
        if y.len() <= xcols.len() + 1 {
            continue;
        }
        let oracle = oracle_ols(&y, &xcols);

        assert_eq!(fit.n, y.len(), "trial {trial}: listwise n mismatch");
        assert_close(fit.coef[0], oracle.coef[0], 1e-8, &format!("const trial {trial}"));
        assert_close(fit.coef[1], oracle.coef[1], 1e-8, &format!("lag1 trial {trial}"));
        assert_close(fit.coef[2], oracle.coef[2], 1e-8, &format!("lag2 trial {trial}"));
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(elapsed < 30.0, "criterion 4 runtime {elapsed:.3}s exceeds 30s");
    println!(
        "PASS criterion 4: panel estimator equals dummy-augmented OLS over 100 unbalanced \
         panels ({elapsed:.3}s)"
    );
}

#[test]
fn criterion_05_sharpe_convention_rendering() {
    // A four-point series with sample mean 0.125 and sample sd 5.725.
    let d = 5.725 * 3.0_f64.sqrt() / 2.0;
    let values = [0.125 + d, 0.125 - d, 0.125 + d, 0.125 - d];
    let row = summary_stats(&values, true).unwrap();
    assert!((row.mean - 0.125).abs() < 1e-12);
    assert!((row.sd - 5.725).abs() < 1e-12);
    let rendered = format_3dp(row.sharpe.unwrap());
    assert_eq!(rendered, "0.022");
    println!("PASS criterion 5: mean 0.125 / sd 5.725 renders sharpe as {rendered}");
}

#[test]
fn criterion_06_star_reproduction_from_published_cell() {
    let (t, p) = pearson_significance(0.758, 265);
    assert!((t - 18.85).abs() < 0.1, "t = {t}");
    assert!(p < 0.01);
    assert_eq!(significance_stars(p), "***");
    println!("PASS criterion 6: r = 0.758, n = 265 gives t ~ {t:.2} and ***");
}

#[test]
fn criterion_07_durbin_watson_closed_forms() {
    for n in [10usize, 100, 2000, 10000] {
        let values: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let dw = durbin_watson(&values).unwrap();
        let expected = 4.0 * (n as f64 - 1.0) / n as f64;
        assert!((dw - expected).abs() <= 1e-12, "n={n}: {dw} vs {expected}");
    }

    let mut rng = ChaCha20Rng::seed_from_u64(7007);
    let noise: Vec<f64> = (0..10_000).map(|_| normal(&mut rng)).collect();
    let dw = durbin_watson(&noise).unwrap();
    assert!((1.9..=2.1).contains(&dw), "white-noise DW = {dw}");
    println!("PASS criterion 7: alternating-series DW = 4(n-1)/n and white-noise DW = {dw:.3}");
}

#[test]
fn criterion_08_log_growth_telescopes() {
    let mut rng = ChaCha20Rng::seed_from_u64(8008);
    for trial in 0..1000 {
        let len = rng.gen_range(5..=60usize);
        let values: Vec<f64> = (0..len).map(|_| rng.gen_range(-5.0_f64..5.0).exp()).collect();
        let growth = log_growth(&daily_series(&values));
        assert!(growth.skipped.is_empty());
        let total: f64 = growth.series.values().sum();
        let direct = (values[len - 1] / values[0]).ln();
        assert!(
            (total - direct).abs() <= 1e-12,
            "trial {trial}: {total} vs {direct}"
        );
    }
    println!("PASS criterion 8: log growth telescopes to ln(end/start) over 1000 series");
}

#[test]
fn criterion_09_monte_carlo_recovery_and_null_calibration() {
    let mut rng = ChaCha20Rng::seed_from_u64(9009);
    let n = 500usize;
    let lags = vec![1u32, 2];

    let mut recovered = 0;
    for _ in 0..200 {
        let x: Vec<f64> = (0..n + 2).map(|_| normal(&mut rng)).collect();
        let xs = daily_series(&x);
        let mut y = TimeSeries::new(Frequency::Daily);
        for t in 2..n + 2 {
            let date = ymd(2021, 1, 1) + Duration::days(t as i64);
            y.insert(date, 0.9 * x[t - 1] + normal(&mut rng));
        }
        let design = make_lags(&y, &[("x", &xs)], &lags).unwrap();
        assert_eq!(design.n(), n);
        let fit = ols(&design.y, &design.design(), OlsOptions::default()).unwrap();
        let b1 = fit.coef[fit.term("x(t-1)").unwrap()];
        if (b1 - 0.9).abs() <= 0.1 {
            recovered += 1;
        }
    }
    assert!(recovered >= 190, "recovered {recovered}/200, need >= 190 (95%)");

    let mut false_stars = 0usize;
    let mut total_coefs = 0usize;
    for _ in 0..200 {
        let x: Vec<f64> = (0..n + 2).map(|_| normal(&mut rng)).collect();
        let xs = daily_series(&x);
        let mut y = TimeSeries::new(Frequency::Daily);
        for t in 2..n + 2 {
            let date = ymd(2021, 1, 1) + Duration::days(t as i64);
            y.insert(date, normal(&mut rng));
        }
        let design = make_lags(&y, &[("x", &xs)], &lags).unwrap();
        let fit = ols(&design.y, &design.design(), OlsOptions::default()).unwrap();
        for j in 1..fit.names.len() {
            total_coefs += 1;
            if significance_stars(fit.p[j]) == "***" {
                false_stars += 1;
            }
        }
    }
    let limit = (total_coefs as f64 * 0.03).floor() as usize;
    assert!(
        false_stars <= limit,
        "{false_stars}/{total_coefs} null coefficients earned ***, limit {limit}"
    );
    println!(
        "PASS criterion 9: planted beta recovered in {recovered}/200 trials; \
         {false_stars}/{total_coefs} null *** (limit {limit})"
    );
}

#[test]
fn criterion_10_excess_kurtosis_convention() {
    let mut rng = ChaCha20Rng::seed_from_u64(1010);
    let values: Vec<f64> = (0..200_000).map(|_| rng.gen_range(0.0_f64..1.0)).collect();
    let row = summary_stats(&values, false).unwrap();
    assert!(
        (-1.3..=-1.1).contains(&row.kurtosis_excess),
        "uniform kurtosis {} outside [-1.3, -1.1]",
        row.kurtosis_excess
    );
    println!(
        "PASS criterion 10: large uniform sample has excess kurtosis {:.4} (population -1.2)",
        row.kurtosis_excess
    );
}

#[test]
fn criterion_11_end_to_end_determinism() {
    let tmp_a = tempfile::tempdir().unwrap();
    let tmp_b = tempfile::tempdir().unwrap();

    for out in [tmp_a.path(), tmp_b.path()] {
        let config = load_fixture_config(out);
        let report = run(&config, Command::All).expect("pipeline runs");
        assert!(report.success(), "pipeline failures: {:?}", report.failures);
    }

    let list = |dir: &std::path::Path| -> Vec<String> {
        let mut names: Vec<String> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        names
    };
    let names_a = list(tmp_a.path());
    let names_b = list(tmp_b.path());
    assert_eq!(names_a, names_b, "artifact listings differ");
    for name in &names_a {
        let a = std::fs::read(tmp_a.path().join(name)).unwrap();
        let b = std::fs::read(tmp_b.path().join(name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between runs");
    }
    println!(
        "PASS criterion 11: two full runs produced byte-identical directories \
         ({} files)",
        names_a.len()
    );
}

#[test]
fn criterion_12_table_schema_conformance() {
    let tmp = tempfile::tempdir().unwrap();
    let config = load_fixture_config(tmp.path());
    let report = run(&config, Command::All).expect("pipeline runs");
    assert!(report.success(), "pipeline failures: {:?}", report.failures);

    let mut checked = 0;
    for id in SCHEMA_IDS {
        let path = tmp.path().join(format!("{id}.csv"));
        assert!(path.exists(), "missing artifact {id}.csv");
        let body = std::fs::read_to_string(&path).unwrap();
        let header: Vec<&str> = body.lines().next().unwrap().split(',').collect();
        let expected = schema_for(id).unwrap();
        assert_eq!(header, expected, "schema mismatch for {id}");
        checked += 1;
    }
    // The index export has a documented schema of its own.
    let index_head = std::fs::read_to_string(tmp.path().join("index.csv")).unwrap();
    assert!(index_head.starts_with("date,level,epoch_id\n"));
    let features_head = std::fs::read_to_string(tmp.path().join("features.csv")).unwrap();
    assert!(features_head.starts_with("date,symbol,feature,value\n"));

    println!("PASS criterion 12: {checked} table schemas match their documented column sets");
}
