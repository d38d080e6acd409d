use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bars::{MinuteBar, Session};

/// Rolling window half-width of the outlier filter.
const HALF_WINDOW: usize = 25;
const MAD_MULTIPLE: f64 = 10.0;
const MEDIAN_MULTIPLE: f64 = 50.0;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CleanAudit {
    pub duplicate_timestamps: usize,
    pub zero_price: usize,
    pub out_of_session: usize,
    pub above_day_median: usize,
    pub rolling_replaced: usize,
    pub dropped_days: Vec<NaiveDate>,
}

impl CleanAudit {
    pub fn actions(&self) -> usize {
        self.duplicate_timestamps
            + self.zero_price
            + self.out_of_session
            + self.above_day_median
            + self.rolling_replaced
            + self.dropped_days.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CleanedBars {
    pub bars: Vec<MinuteBar>,
    pub audit: CleanAudit,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Replaces bars whose average price is more than ten mean absolute
/// deviations from the centered rolling median of up to 25 neighbours on
/// each side (same day, the bar itself excluded).
fn rolling_filter(day: &mut [MinuteBar]) -> usize {
    let prices: Vec<f64> = day.iter().map(|b| b.average_price()).collect();
    let n = prices.len();
    let mut replaced = 0;
    let mut buf = Vec::with_capacity(2 * HALF_WINDOW);
    for i in 0..n {
        buf.clear();
        let lo = i.saturating_sub(HALF_WINDOW);
        let hi = (i + HALF_WINDOW + 1).min(n);
        buf.extend(prices[lo..i].iter().chain(&prices[i + 1..hi]));
        if buf.len() < 2 {
            continue;
        }
        let med = median(&mut buf);
        let mad = buf.iter().map(|p| (p - med).abs()).sum::<f64>() / buf.len() as f64;
        if mad > 0.0 && (prices[i] - med).abs() > MAD_MULTIPLE * mad {
            let b = &mut day[i];
            b.open = med;
            b.close = med;
            b.high = b.high.max(med);
            b.low = b.low.min(med);
            replaced += 1;
        }
    }
    replaced
}

/// Cleaning in the usual order: duplicate stamps, zero prices and
/// out-of-session bars are deleted, then bars above fifty times the day's
/// median price, then the rolling-median replacement. Days left empty are
/// dropped. Input must be sorted by timestamp.
pub fn clean_bars(bars: &[MinuteBar], session: &Session) -> CleanedBars {
    let mut audit = CleanAudit::default();
    let mut kept: Vec<MinuteBar> = Vec::with_capacity(bars.len());
    for b in bars {
        if kept.last().is_some_and(|p| p.timestamp == b.timestamp) {
            audit.duplicate_timestamps += 1;
            continue;
        }
        if [b.open, b.high, b.low, b.close].iter().any(|p| !(*p > 0.0)) {
            audit.zero_price += 1;
            continue;
        }
        if session.offset(&b.timestamp).is_none() {
            audit.out_of_session += 1;
            continue;
        }
        kept.push(*b);
    }

    let mut days: BTreeMap<NaiveDate, Vec<MinuteBar>> = BTreeMap::new();
    for b in kept {
        days.entry(b.date()).or_default().push(b);
    }
    let results: Vec<(NaiveDate, Vec<MinuteBar>, usize, usize)> = days
        .into_par_iter()
        .map(|(date, mut day)| {
            let mut prices: Vec<f64> = day.iter().map(|b| b.average_price()).collect();
            let med = median(&mut prices);
            let before = day.len();
            day.retain(|b| b.average_price() <= MEDIAN_MULTIPLE * med);
            let removed = before - day.len();
            let replaced = rolling_filter(&mut day);
            (date, day, removed, replaced)
        })
        .collect();
    let mut out = Vec::with_capacity(bars.len());
    for (date, day, removed, replaced) in results {
        audit.above_day_median += removed;
        audit.rolling_replaced += replaced;
        if day.is_empty() {
            audit.dropped_days.push(date);
        }
        out.extend(day);
    }
    CleanedBars { bars: out, audit }
}
