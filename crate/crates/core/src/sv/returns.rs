use std::collections::BTreeMap;
use std::ops::Range;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::bars::{weekday_slot, MinuteBar, Session};
use super::SvError;

/// Maps trading days and session minutes onto the model clock.
///
/// Day `d` (weekdays counted from `epoch`) covers `[d, d + 1)` in days, and
/// model time is days divided by `time_unit_days`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeAxis {
    pub epoch: NaiveDate,
    pub session: Session,
    pub time_unit_days: f64,
}

impl TimeAxis {
    pub fn new(epoch: NaiveDate, session: Session, time_unit_days: f64) -> Result<Self, SvError> {
        if !(time_unit_days > 0.0 && time_unit_days.is_finite()) {
            return Err(SvError::InvalidConfig(format!("time unit must be positive, got {time_unit_days}")));
        }
        if session.minutes() == 0 {
            return Err(SvError::InvalidConfig("empty trading session".into()));
        }
        Ok(Self { epoch, session, time_unit_days })
    }

    /// Weekdays from the epoch to `date`.
    pub fn day_index(&self, date: NaiveDate) -> i64 {
        let days = (date - self.epoch).num_days();
        let weeks = days.div_euclid(7);
        let rem = days.rem_euclid(7);
        let wd0 = self.epoch.weekday().num_days_from_monday() as i64;
        let mut extra = 0;
        for k in 0..rem {
            if (wd0 + k).rem_euclid(7) < 5 {
                extra += 1;
            }
        }
        5 * weeks + extra
    }

    pub fn time(&self, day: i64, minute: f64) -> f64 {
        (day as f64 + minute / self.session.minutes() as f64) / self.time_unit_days
    }

    /// Length of `minutes` session minutes on the model clock.
    pub fn span(&self, minutes: f64) -> f64 {
        minutes / self.session.minutes() as f64 / self.time_unit_days
    }
}

/// Log-price increments on a regular intraday grid.
///
/// Return `i` runs from `start[i]` to `end[i]`; it covers grid minutes
/// `slot[i]` to `slot[i] + step_minutes` of trading day `day[i]`. Overnight
/// moves are not returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub axis: TimeAxis,
    pub step_minutes: u32,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub returns: Vec<f64>,
    pub day: Vec<i64>,
    pub cycle_day: Vec<usize>,
    pub slot: Vec<u32>,
    /// Returns whose end point was carried forward from an earlier bar.
    pub carried: Vec<usize>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    /// Grid step `h` on the model clock.
    pub fn grid_step(&self) -> f64 {
        self.axis.span(self.step_minutes as f64)
    }

    /// Copy without the returns at `drop` (indices into this series).
    pub fn without(&self, drop: &[usize]) -> Self {
        let mut keep = vec![true; self.len()];
        for &i in drop {
            if i < keep.len() {
                keep[i] = false;
            }
        }
        let pick = |v: &Vec<f64>| v.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect::<Vec<_>>();
        let mut index = vec![usize::MAX; self.len()];
        let mut j = 0;
        for (i, k) in keep.iter().enumerate() {
            if *k {
                index[i] = j;
                j += 1;
            }
        }
        Self {
            axis: self.axis,
            step_minutes: self.step_minutes,
            start: pick(&self.start),
            end: pick(&self.end),
            returns: pick(&self.returns),
            day: self.day.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect(),
            cycle_day: self.cycle_day.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect(),
            slot: self.slot.iter().zip(&keep).filter(|(_, k)| **k).map(|(x, _)| *x).collect(),
            carried: self.carried.iter().filter_map(|&i| (index[i] != usize::MAX).then_some(index[i])).collect(),
        }
    }
}

/// Differences log average prices on a `sampling_minutes` grid within each
/// session. A missing grid bar takes the last earlier price of the same
/// day (or the first later one at the open) and is listed in `carried`.
pub fn compute_returns(bars: &[MinuteBar], axis: &TimeAxis, sampling_minutes: u32, cycle_length: usize) -> Result<ReturnSeries, SvError> {
    let session_minutes = axis.session.minutes();
    if sampling_minutes == 0 || session_minutes % sampling_minutes != 0 {
        return Err(SvError::InvalidConfig(format!(
            "sampling step {sampling_minutes} must divide the {session_minutes}-minute session"
        )));
    }
    let mut days: BTreeMap<NaiveDate, Vec<(u32, f64)>> = BTreeMap::new();
    for b in bars {
        let p = b.average_price();
        if !(p > 0.0) {
            return Err(SvError::InvalidBars(format!("non-positive price at {}", b.timestamp)));
        }
        if let Some(m) = axis.session.offset(&b.timestamp) {
            days.entry(b.date()).or_default().push((m, p.ln()));
        }
    }
    let grid: Vec<u32> = (0..session_minutes).step_by(sampling_minutes as usize).collect();
    let mut rs = ReturnSeries {
        axis: *axis,
        step_minutes: sampling_minutes,
        start: vec![],
        end: vec![],
        returns: vec![],
        day: vec![],
        cycle_day: vec![],
        slot: vec![],
        carried: vec![],
    };
    for (date, recs) in days {
        let d = axis.day_index(date);
        let cyc = weekday_slot(date, cycle_length);
        let mut k = 0;
        let mut prev: Option<f64> = None;
        let mut levels = Vec::with_capacity(grid.len());
        for &g in &grid {
            while k < recs.len() && recs[k].0 <= g {
                prev = Some(recs[k].1);
                k += 1;
            }
            let exact = k > 0 && recs[k - 1].0 == g;
            levels.push((prev.unwrap_or(recs[0].1), exact));
        }
        for i in 1..levels.len() {
            if !levels[i].1 {
                rs.carried.push(rs.returns.len());
            }
            rs.returns.push(levels[i].0 - levels[i - 1].0);
            rs.start.push(axis.time(d, grid[i - 1] as f64));
            rs.end.push(axis.time(d, grid[i] as f64));
            rs.day.push(d);
            rs.cycle_day.push(cyc);
            rs.slot.push(grid[i - 1]);
        }
    }
    Ok(rs)
}

/// A block of consecutive intraday returns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub day: i64,
    pub cycle_day: usize,
    /// Index of the window within its day.
    pub position: usize,
    pub start: f64,
    pub end: f64,
    pub range: Range<usize>,
}

impl Window {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

/// Number of windows of `window_minutes` in a session sampled every
/// `step_minutes`.
pub fn windows_per_day(session_minutes: u32, step_minutes: u32, window_minutes: u32) -> usize {
    let last = session_minutes - step_minutes;
    last.div_ceil(window_minutes) as usize
}

/// Groups returns into windows of `window_minutes` aligned on the open.
///
/// A window's span is nominal: it covers its share of the intraday grid
/// even if some returns were deleted.
pub fn windows(rs: &ReturnSeries, window_minutes: u32) -> Result<Vec<Window>, SvError> {
    if window_minutes == 0 || window_minutes % rs.step_minutes != 0 {
        return Err(SvError::InvalidConfig(format!(
            "window of {window_minutes} minutes does not align with the {}-minute grid",
            rs.step_minutes
        )));
    }
    let last_minute = rs.axis.session.minutes() - rs.step_minutes;
    let mut out: Vec<Window> = Vec::new();
    for i in 0..rs.len() {
        let pos = (rs.slot[i] / window_minutes) as usize;
        match out.last_mut() {
            Some(w) if w.day == rs.day[i] && w.position == pos => w.range.end = i + 1,
            _ => {
                let a = pos as u32 * window_minutes;
                let b = (a + window_minutes).min(last_minute);
                out.push(Window {
                    day: rs.day[i],
                    cycle_day: rs.cycle_day[i],
                    position: pos,
                    start: rs.axis.time(rs.day[i], a as f64),
                    end: rs.axis.time(rs.day[i], b as f64),
                    range: i..i + 1,
                });
            }
        }
    }
    Ok(out)
}

/// `sum R_i^2` over each window.
pub fn realized_variance(rs: &ReturnSeries, windows: &[Window]) -> Vec<f64> {
    windows.iter().map(|w| rs.returns[w.range.clone()].iter().map(|r| r * r).sum()).collect()
}

/// `(pi/2) sum |R_i| |R_{i-1}|` over each window. Windows with fewer than two
/// returns are an error.
pub fn bipower_variation(rs: &ReturnSeries, windows: &[Window]) -> Result<Vec<f64>, SvError> {
    windows
        .iter()
        .map(|w| {
            let r = &rs.returns[w.range.clone()];
            if r.len() < 2 {
                return Err(SvError::Degenerate(format!("window at {} has fewer than two returns", w.start)));
            }
            Ok(std::f64::consts::FRAC_PI_2 * r.windows(2).map(|p| p[0].abs() * p[1].abs()).sum::<f64>())
        })
        .collect()
}
