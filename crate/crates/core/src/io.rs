//! CSV readers and writers for the tabular artifacts.

use std::path::Path;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gig::GigParams;
use crate::harris::Trajectory;
use crate::inference::{GibbsVariant, InferenceError, ObservationSeries, PosteriorChains};
use crate::sv::MinuteBar;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Invalid(String),
}

impl From<InferenceError> for IoError {
    fn from(e: InferenceError) -> Self {
        IoError::Invalid(e.to_string())
    }
}

#[derive(Serialize, Deserialize)]
struct ObsRow {
    time: f64,
    value: f64,
}

pub fn read_observations(path: &Path) -> Result<ObservationSeries, IoError> {
    let mut r = csv::Reader::from_path(path)?;
    let (mut t, mut v) = (Vec::new(), Vec::new());
    for row in r.deserialize::<ObsRow>() {
        let row = row?;
        t.push(row.time);
        v.push(row.value);
    }
    Ok(ObservationSeries::new(t, v)?)
}

pub fn write_observations(path: &Path, obs: &ObservationSeries) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path)?;
    for (time, value) in obs.times().iter().zip(obs.values()) {
        w.serialize(ObsRow { time: *time, value: *value })?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ChainRow {
    draw: usize,
    alpha: f64,
    lambda: Option<f64>,
    kappa: Option<f64>,
    eta: Option<f64>,
    changes: usize,
}

/// One row per retained sweep: `draw,alpha,lambda,kappa,eta,changes`.
pub fn write_chains(path: &Path, chains: &PosteriorChains) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path)?;
    for i in 0..chains.len() {
        let g = chains.gig.get(i);
        w.serialize(ChainRow {
            draw: i,
            alpha: chains.alpha[i],
            lambda: g.map(|g| g.lambda),
            kappa: g.map(|g| g.kappa),
            eta: g.map(|g| g.eta),
            changes: chains.m[i],
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads chains written by [`write_chains`]. Burn-in and thinning are not
/// stored in the file and are supplied by the caller.
pub fn read_chains(path: &Path, variant: GibbsVariant, burn_in: usize, thinning: usize) -> Result<PosteriorChains, IoError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut c = PosteriorChains { variant, alpha: vec![], gig: vec![], m: vec![], z: None, burn_in, thinning };
    for row in r.deserialize::<ChainRow>() {
        let row = row?;
        c.alpha.push(row.alpha);
        c.m.push(row.changes);
        match (row.lambda, row.kappa, row.eta) {
            (Some(lambda), Some(kappa), Some(eta)) => c.gig.push(GigParams { lambda, kappa, eta }),
            (None, None, None) => {}
            _ => return Err(IoError::Invalid(format!("partial GIG draw in row {}", row.draw))),
        }
    }
    if !c.gig.is_empty() && c.gig.len() != c.alpha.len() {
        return Err(IoError::Invalid("some rows lack GIG draws".into()));
    }
    Ok(c)
}

const TIMESTAMP_FORMATS: [&str; 4] = ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"];

fn parse_timestamp(s: &str) -> Result<NaiveDateTime, IoError> {
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s.trim(), f).ok())
        .ok_or_else(|| IoError::Invalid(format!("unparseable timestamp {s:?}")))
}

#[derive(Deserialize)]
struct BarRow {
    timestamp: String,
    open: f64,
    high: f64,
    low: f64,
    close: f64,
    volume: f64,
}

/// Reads `timestamp,open,high,low,close,volume` with ISO-8601 stamps.
pub fn read_bars(path: &Path) -> Result<Vec<MinuteBar>, IoError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in r.deserialize::<BarRow>() {
        let row = row?;
        out.push(MinuteBar {
            timestamp: parse_timestamp(&row.timestamp)?,
            open: row.open,
            high: row.high,
            low: row.low,
            close: row.close,
            volume: row.volume,
        });
    }
    Ok(out)
}

pub fn write_bars(path: &Path, bars: &[MinuteBar]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["timestamp", "open", "high", "low", "close", "volume"])?;
    for b in bars {
        w.write_record([
            b.timestamp.format("%Y-%m-%dT%H:%M:%S").to_string(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.volume.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Jump skeleton as `path,time,value`: the start value at the origin, one
/// row per jump, and the last value repeated at the horizon.
pub fn write_skeletons(path: &Path, paths: &[Trajectory]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["path", "time", "value"])?;
    for (k, t) in paths.iter().enumerate() {
        let k = k.to_string();
        w.write_record([k.as_str(), &t.origin.to_string(), &t.start.to_string()])?;
        for (s, v) in t.jump_times.iter().zip(&t.states) {
            w.write_record([k.as_str(), &s.to_string(), &v.to_string()])?;
        }
        w.write_record([k.as_str(), &t.horizon.to_string(), &t.last_value().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_skeletons`].
pub fn read_skeletons(path: &Path) -> Result<Vec<Trajectory>, IoError> {
    let mut r = csv::Reader::from_path(path)?;
    let mut groups: Vec<(usize, Vec<(f64, f64)>)> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).ok_or_else(|| IoError::Invalid("short row".into()));
        let k: usize = field(0)?.parse().map_err(|_| IoError::Invalid("bad path index".into()))?;
        let t: f64 = field(1)?.parse().map_err(|_| IoError::Invalid("bad time".into()))?;
        let v: f64 = field(2)?.parse().map_err(|_| IoError::Invalid("bad value".into()))?;
        match groups.last_mut() {
            Some((j, pts)) if *j == k => pts.push((t, v)),
            _ => groups.push((k, vec![(t, v)])),
        }
    }
    groups
        .into_iter()
        .map(|(_, pts)| {
            if pts.len() < 2 {
                return Err(IoError::Invalid("a skeleton needs origin and horizon rows".into()));
            }
            let (origin, start) = pts[0];
            let horizon = pts[pts.len() - 1].0;
            let inner = &pts[1..pts.len() - 1];
            Trajectory::new(origin, start, inner.iter().map(|p| p.0).collect(), inner.iter().map(|p| p.1).collect(), horizon)
                .map_err(|e| IoError::Invalid(e.to_string()))
        })
        .collect()
}
