use chrono::{Duration, NaiveDate};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::bars::{trading_days, MinuteBar, Session};
use super::returns::TimeAxis;
use super::{SvError, SvParams};
use crate::harris::{integrate_at_times, simulate, Marginal, SfHarrisParams, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticConfig {
    /// First trading day; later days skip weekends.
    pub start: NaiveDate,
    pub days: usize,
    pub session: Session,
    pub time_unit_days: f64,
    pub params: SvParams,
    /// Factor for each session minute, the same on every day.
    pub intraday: Option<Vec<f64>>,
    pub jumps: usize,
    /// Jump size in local one-minute standard deviations.
    pub jump_sigmas: f64,
    pub start_price: f64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2020, 1, 6).expect("valid date"),
            days: 252,
            session: Session::default(),
            time_unit_days: 1.0,
            params: SvParams {
                mu: 0.0,
                beta: 0.0,
                alpha: 1.0,
                gig: crate::gig::GigParams { lambda: -1.0, kappa: 2.0, eta: 1e-4 },
            },
            intraday: None,
            jumps: 0,
            jump_sigmas: 10.0,
            start_price: 100.0,
        }
    }
}

/// Minute factors `1 + a cos(2 pi m / M)`, scaled to unit mean: high at
/// the open and the close, low at midday.
pub fn u_shape(session_minutes: u32, amplitude: f64) -> Vec<f64> {
    let m = session_minutes as f64;
    let raw: Vec<f64> = (0..session_minutes)
        .map(|k| 1.0 + amplitude * (2.0 * std::f64::consts::PI * (k as f64 + 0.5) / m).cos())
        .collect();
    let mean = raw.iter().sum::<f64>() / m;
    raw.into_iter().map(|v| v / mean).collect()
}

/// Bars and the latent quantities behind them.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub bars: Vec<MinuteBar>,
    pub axis: TimeAxis,
    /// Periodically adjusted spot path on the model clock.
    pub volatility: Trajectory,
    /// `H*` increment of each one-minute return, in bar order.
    pub minute_variance: Vec<f64>,
    /// Indices of the one-minute returns that carry a jump.
    pub jump_returns: Vec<usize>,
    pub jump_sizes: Vec<f64>,
}

/// Simulates one-minute bars from the time-changed Brownian model.
///
/// Each bar has open = high = low = close, the price at its stamp, so the
/// average price is the sampled path itself. Every session opens at
/// `start_price`: overnight moves are outside the model, and resetting keeps
/// long samples of high variance inside floating-point range.
pub fn generate_bars<R: Rng>(cfg: &SyntheticConfig, rng: &mut R) -> Result<SyntheticData, SvError> {
    let minutes = cfg.session.minutes();
    if cfg.days == 0 || minutes < 2 {
        return Err(SvError::InvalidConfig("need at least one day and two session minutes".into()));
    }
    if let Some(f) = &cfg.intraday {
        if f.len() != minutes as usize || f.iter().any(|v| !(*v > 0.0)) {
            return Err(SvError::InvalidConfig("intraday factors must be positive, one per session minute".into()));
        }
    }
    let axis = TimeAxis::new(cfg.start, cfg.session, cfg.time_unit_days)?;
    let dates = trading_days(cfg.start, cfg.days);
    let marginal = Marginal::gig(cfg.params.gig).map_err(|e| SvError::InvalidConfig(e.to_string()))?;
    let harris = SfHarrisParams::new(cfg.params.alpha, marginal).map_err(|e| SvError::InvalidConfig(e.to_string()))?;
    let day_idx: Vec<i64> = dates.iter().map(|d| axis.day_index(*d)).collect();
    let horizon = axis.time(*day_idx.last().expect("days > 0") + 1, 0.0);
    let volatility = simulate(&harris, horizon, rng, 0.0).map_err(|e| SvError::Degenerate(e.to_string()))?;

    let times: Vec<f64> = day_idx
        .iter()
        .flat_map(|&d| (0..minutes).map(move |m| axis.time(d, m as f64)))
        .collect();
    let h = integrate_at_times(&volatility, &times).map_err(|e| SvError::Degenerate(e.to_string()))?;
    let per_day = minutes as usize;
    let mut minute_variance = Vec::with_capacity(cfg.days * (per_day - 1));
    let mut increments = Vec::with_capacity(minute_variance.capacity());
    for d in 0..cfg.days {
        for m in 1..per_day {
            let k = d * per_day + m;
            let f = cfg.intraday.as_ref().map_or(1.0, |f| f[m - 1]);
            let v = f * (h[k] - h[k - 1]);
            let dt = times[k] - times[k - 1];
            let z: f64 = StandardNormal.sample(rng);
            minute_variance.push(v);
            increments.push(cfg.params.mu * dt + cfg.params.beta * v + v.sqrt() * z);
        }
    }
    let chosen = if cfg.jumps > 0 {
        let mut idx = sample(rng, increments.len(), cfg.jumps.min(increments.len())).into_vec();
        idx.sort_unstable();
        idx
    } else {
        Vec::new()
    };
    let mut jump_sizes = Vec::with_capacity(chosen.len());
    for &i in &chosen {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let j = sign * cfg.jump_sigmas * minute_variance[i].sqrt();
        increments[i] += j;
        jump_sizes.push(j);
    }

    let mut bars = Vec::with_capacity(cfg.days * per_day);
    let mut k = 0;
    for date in &dates {
        let open = date.and_time(cfg.session.open);
        let mut y = cfg.start_price.ln();
        for m in 0..per_day {
            if m > 0 {
                y += increments[k];
                k += 1;
            }
            let p = y.exp();
            bars.push(MinuteBar {
                timestamp: open + Duration::minutes(m as i64),
                open: p,
                high: p,
                low: p,
                close: p,
                volume: 100.0,
            });
        }
    }
    Ok(SyntheticData { bars, axis, volatility, minute_variance, jump_returns: chosen, jump_sizes })
}
