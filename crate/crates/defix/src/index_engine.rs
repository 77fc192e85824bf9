//! The divisor-chained, value-weighted index.
//!
//! Membership is screened by market cap, sized to a multiple of five, and
//! snapshotted as quantities `Q_i = market_cap_i / price_i`. Levels are
//! `sum_i beta_i P_it Q_i / divisor`; the divisor is re-based at every
//! reconstitution against the prevailing level so the series never jumps.

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::TokenPanel;
use crate::series::{Frequency, TimeSeries};

pub const DEFAULT_BASE_VALUE: f64 = 1000.0;
pub const DEFAULT_MIN_MCAP: f64 = 1_000_000.0;

#[derive(Debug, Error)]
pub enum IndexError {
    #[error("only {eligible} eligible symbols on {date}, need at least 5")]
    InsufficientEligible { date: NaiveDate, eligible: usize },
    #[error("constituent capitalization is zero on {date}")]
    ZeroCapitalization { date: NaiveDate },
    #[error("missing price for {symbol} on {date}")]
    MissingPrice { symbol: String, date: NaiveDate },
    #[error("panel has no dates")]
    EmptyPanel,
}

/// One index member: quantity snapshot plus adjustment factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub symbol: String,
    /// Token units, `market_cap / price` at the selection date.
    pub quantity: f64,
    /// Adjustment factor; 1 unless configured otherwise.
    pub beta: f64,
}

/// The membership snapshot taken at one reconstitution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstituentSet {
    pub effective_date: NaiveDate,
    pub members: Vec<Member>,
}

impl ConstituentSet {
    /// Total adjusted capitalization `sum beta_i P_it Q_i` at `date`.
    pub fn capitalization(&self, panel: &TokenPanel, date: NaiveDate) -> Result<f64, IndexError> {
        let mut total = 0.0;
        for m in &self.members {
            let price = panel
                .get(&m.symbol, date)
                .and_then(|o| o.price)
                .ok_or_else(|| IndexError::MissingPrice { symbol: m.symbol.clone(), date })?;
            total += m.beta * price * m.quantity;
        }
        Ok(total)
    }
}

/// The scaling constant in force for one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divisor {
    pub value: f64,
    pub effective_date: NaiveDate,
}

/// Why an epoch started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochReason {
    Inception,
    Scheduled,
    /// A member lost price data mid-epoch; membership was re-selected on
    /// the last day every member was still priced.
    Forced,
}

/// One (membership, divisor) regime together with its trigger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Epoch {
    pub constituents: ConstituentSet,
    pub divisor: Divisor,
    pub reason: EpochReason,
}

/// Dated levels plus the epoch history that produced them.
#[derive(Debug, Clone)]
pub struct IndexSeries {
    pub base_value: f64,
    pub levels: TimeSeries,
    pub epochs: Vec<Epoch>,
    /// Epoch index in force per level date (parallel to `levels`).
    pub epoch_ids: Vec<usize>,
}

/// How often membership is re-selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReconstitutionCadence {
    Weekly,
    #[default]
    Monthly,
    Quarterly,
}

impl ReconstitutionCadence {
    /// True when `date` opens a new period relative to `prev`.
    fn new_period(&self, prev: NaiveDate, date: NaiveDate) -> bool {
        match self {
            ReconstitutionCadence::Weekly => {
                crate::series::week_start(date) > crate::series::week_start(prev)
            }
            ReconstitutionCadence::Monthly => {
                (date.year(), date.month()) > (prev.year(), prev.month())
            }
            ReconstitutionCadence::Quarterly => {
                let q = |d: NaiveDate| (d.year(), (d.month0() / 3) as u32);
                q(date) > q(prev)
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndexConfig {
    pub min_mcap: f64,
    /// Cap on membership before rounding down to a multiple of five.
    pub target_count: Option<usize>,
    pub base_value: f64,
    pub cadence: ReconstitutionCadence,
    /// Adjustment factor applied to every member.
    pub beta: f64,
    /// If set, eligibility also requires a price on every one of the last
    /// `lookback_days` days ending at the selection date.
    pub lookback_days: Option<usize>,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            min_mcap: DEFAULT_MIN_MCAP,
            target_count: None,
            base_value: DEFAULT_BASE_VALUE,
            cadence: ReconstitutionCadence::Monthly,
            beta: 1.0,
            lookback_days: None,
        }
    }
}

fn floor_to_multiple_of_five(n: usize) -> usize {
    n - n % 5
}

/// Rank eligible symbols by market cap and snapshot the top multiple of five.
///
/// Eligibility on `date`: a price and a market cap are present, price > 0,
/// and market cap >= `config.min_mcap` (inclusive). Ties break by symbol.
/// `exclude` removes symbols regardless of eligibility.
pub fn select_constituents(
    panel: &TokenPanel,
    date: NaiveDate,
    config: &IndexConfig,
    exclude: &[String],
) -> Result<ConstituentSet, IndexError> {
    let mut eligible: Vec<(String, f64, f64)> = Vec::new(); // (symbol, mcap, price)
    for symbol in panel.symbols() {
        if exclude.iter().any(|e| e == symbol) {
            continue;
        }
        let obs = match panel.get(symbol, date) {
            Some(o) => o,
            None => continue,
        };
        let (price, mcap) = match (obs.price, obs.market_cap) {
            (Some(p), Some(m)) if p > 0.0 => (p, m),
            _ => continue,
        };
        if mcap < config.min_mcap {
            continue;
        }
        if let Some(window) = config.lookback_days {
            let complete = (0..window as i64).all(|back| {
                panel
                    .get(symbol, date - chrono::Duration::days(back))
                    .and_then(|o| o.price)
                    .is_some()
            });
            if !complete {
                continue;
            }
        }
        eligible.push((symbol.to_string(), mcap, price));
    }

    // Market cap descending, symbol ascending on ties.
    eligible.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));

    let capped = config.target_count.map_or(eligible.len(), |t| t.min(eligible.len()));
    let k = floor_to_multiple_of_five(capped);
    if k < 5 {
        return Err(IndexError::InsufficientEligible { date, eligible: eligible.len() });
    }

    let members = eligible[..k]
        .iter()
        .map(|(symbol, mcap, price)| Member {
            symbol: symbol.clone(),
            quantity: mcap / price,
            beta: config.beta,
        })
        .collect();
    Ok(ConstituentSet { effective_date: date, members })
}

/// `divisor = sum beta_i P_i Q_i / target_level`, so that evaluating the
/// set at its effective date reproduces `target_level`.
pub fn compute_divisor(
    set: &ConstituentSet,
    panel: &TokenPanel,
    target_level: f64,
) -> Result<Divisor, IndexError> {
    assert!(target_level > 0.0, "target level must be positive");
    let cap = set.capitalization(panel, set.effective_date)?;
    if cap <= 0.0 {
        return Err(IndexError::ZeroCapitalization { date: set.effective_date });
    }
    Ok(Divisor { value: cap / target_level, effective_date: set.effective_date })
}

/// Index level at `date` under a fixed membership and divisor.
pub fn index_level(
    set: &ConstituentSet,
    divisor: Divisor,
    panel: &TokenPanel,
    date: NaiveDate,
) -> Result<f64, IndexError> {
    assert!(divisor.value > 0.0, "divisor must be positive");
    Ok(set.capitalization(panel, date)? / divisor.value)
}

/// Build the full divisor-chained series over a daily panel.
///
/// Inception happens on the first date with at least five eligible symbols.
/// Scheduled reconstitutions re-select membership on the first trading day
/// of each new period; the divisor is re-based against the level computed
/// that day under the outgoing set, so the series is continuous. A member
/// losing price data mid-epoch forces an unscheduled reconstitution dated
/// to the last day the outgoing set was fully priced.
pub fn run_index(panel: &TokenPanel, config: &IndexConfig) -> Result<IndexSeries, IndexError> {
    assert_eq!(panel.frequency, Frequency::Daily, "index runs on daily panels");
    let dates = panel.all_dates();
    if dates.is_empty() {
        return Err(IndexError::EmptyPanel);
    }

    // Scan forward to the first date where selection succeeds.
    let mut start_idx = None;
    let mut first_err = None;
    for (i, &date) in dates.iter().enumerate() {
        match select_constituents(panel, date, config, &[]) {
            Ok(_) => {
                start_idx = Some(i);
                break;
            }
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    let start_idx = start_idx.ok_or_else(|| first_err.expect("dates is non-empty"))?;

    let inception = dates[start_idx];
    let set = select_constituents(panel, inception, config, &[])?;
    let divisor = compute_divisor(&set, panel, config.base_value)?;
    let mut epochs = vec![Epoch { constituents: set, divisor, reason: EpochReason::Inception }];

    let mut levels = TimeSeries::new(Frequency::Daily);
    let mut epoch_ids = Vec::new();
    // The divisor construction makes the level at an effective date equal
    // its target by definition; emitting the target avoids a spurious
    // division round-trip.
    levels.insert(inception, config.base_value);
    epoch_ids.push(0);
    let mut prev_date = inception;
    let mut prev_level = config.base_value;

    for &date in &dates[start_idx + 1..] {
        let epoch = epochs.last().expect("at least the inception epoch");

        // Handle members losing data: reconstitute retroactively on the
        // last fully-priced day, excluding the dead symbols, then price
        // today under the new set.
        let mut level = index_level(&epoch.constituents, epoch.divisor, panel, date);
        let mut excluded: Vec<String> = Vec::new();
        while let Err(IndexError::MissingPrice { ref symbol, .. }) = level {
            excluded.push(symbol.clone());
            let set = select_constituents(panel, prev_date, config, &excluded)?;
            let divisor = compute_divisor(&set, panel, prev_level)?;
            epochs.push(Epoch { constituents: set, divisor, reason: EpochReason::Forced });
            let epoch = epochs.last().unwrap();
            level = index_level(&epoch.constituents, epoch.divisor, panel, date);
        }
        let level = level?;

        // Scheduled reconstitution on the first trading day of a period:
        // today's level under the outgoing set anchors the incoming divisor,
        // so the emitted level is the same number under either set.
        if config.cadence.new_period(prev_date, date) {
            let set = select_constituents(panel, date, config, &[])?;
            let divisor = compute_divisor(&set, panel, level)?;
            epochs.push(Epoch { constituents: set, divisor, reason: EpochReason::Scheduled });
        }

        levels.insert(date, level);
        epoch_ids.push(epochs.len() - 1);
        prev_date = date;
        prev_level = level;
    }

    Ok(IndexSeries { base_value: config.base_value, levels, epochs, epoch_ids })
}
