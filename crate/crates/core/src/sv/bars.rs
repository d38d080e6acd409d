use chrono::{Datelike, NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};

use super::SvError;

/// One-minute OHLC record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinuteBar {
    pub timestamp: NaiveDateTime,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl MinuteBar {
    pub fn average_price(&self) -> f64 {
        0.5 * (self.open + self.close)
    }

    pub fn validate(&self) -> Result<(), SvError> {
        let ok = [self.open, self.high, self.low, self.close].iter().all(|p| p.is_finite() && *p >= 0.0)
            && self.volume >= 0.0
            && self.low <= self.open.min(self.close)
            && self.open.max(self.close) <= self.high;
        if ok {
            Ok(())
        } else {
            Err(SvError::InvalidBars(format!("inconsistent bar at {}", self.timestamp)))
        }
    }

    pub fn date(&self) -> NaiveDate {
        self.timestamp.date()
    }
}

/// Regular trading hours. Bars are stamped at the start of their minute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub open: NaiveTime,
    pub close: NaiveTime,
}

impl Default for Session {
    fn default() -> Self {
        Self {
            open: NaiveTime::from_hms_opt(9, 30, 0).expect("valid time"),
            close: NaiveTime::from_hms_opt(16, 0, 0).expect("valid time"),
        }
    }
}

impl Session {
    pub fn minutes(&self) -> u32 {
        ((self.close - self.open).num_minutes()).max(0) as u32
    }

    /// Minute offset from the open, if the bar lies inside the session.
    pub fn offset(&self, ts: &NaiveDateTime) -> Option<u32> {
        let t = ts.time();
        if t < self.open || t >= self.close || t.second() != 0 {
            return None;
        }
        Some((t - self.open).num_minutes() as u32)
    }
}

/// Position of a date in a weekly cycle of `cycle` trading days.
pub fn weekday_slot(date: NaiveDate, cycle: usize) -> usize {
    date.weekday().num_days_from_monday() as usize % cycle.max(1)
}

/// Trading days (Monday to Friday) starting at `start`.
pub fn trading_days(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(count);
    let mut d = start;
    while out.len() < count {
        if d.weekday().num_days_from_monday() < 5 {
            out.push(d);
        }
        d = d.succ_opt().expect("date in range");
    }
    out
}

/// Splits bars by trading day: the first `ceil(frac * days)` days and the rest.
pub fn split_by_days(bars: &[MinuteBar], frac: f64) -> (Vec<MinuteBar>, Vec<MinuteBar>) {
    let mut days: Vec<NaiveDate> = bars.iter().map(|b| b.date()).collect();
    days.dedup();
    let k = ((frac * days.len() as f64).ceil() as usize).min(days.len());
    let Some(cut) = days.get(k).copied() else {
        return (bars.to_vec(), Vec::new());
    };
    let (a, b): (Vec<MinuteBar>, Vec<MinuteBar>) = bars.iter().partition(|b| b.date() < cut);
    (a, b)
}
