use serde::{Deserialize, Serialize};

use super::gibbs::PosteriorChains;
use super::InferenceError;
use crate::gig::GigParams;
use crate::numerics::stats::{quantile_sorted, variance};

pub const MIN_MODE_DRAWS: usize = 500;
pub const MIN_HPD_SAMPLES: usize = 100;

const GRID: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEstimate {
    pub alpha: f64,
    pub gig: Option<GigParams>,
}

/// Silverman's rule of thumb, `0.9 min(sd, IQR/1.34) n^{-1/5}`.
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let sd = variance(sorted).max(0.0).sqrt();
    let iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

fn kde_at(sorted: &[f64], h: f64, x: f64) -> f64 {
    let reach = 8.0 * h;
    let lo = sorted.partition_point(|v| *v < x - reach);
    let hi = sorted.partition_point(|v| *v <= x + reach);
    sorted[lo..hi]
        .iter()
        .map(|v| {
            let u = (x - v) / h;
            (-0.5 * u * u).exp()
        })
        .sum()
}

/// Location of the highest peak of a Gaussian kernel density estimate.
pub fn kde_mode(samples: &[f64]) -> Result<f64, InferenceError> {
    if samples.is_empty() || samples.iter().any(|v| !v.is_finite()) {
        return Err(InferenceError::InvalidData("mode needs finite samples".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let (min, max) = (s[0], s[s.len() - 1]);
    let h = silverman_bandwidth(&s);
    if !(h > 0.0) || max == min {
        return Ok(crate::numerics::stats::median(&s));
    }
    let step = (max - min) / (GRID - 1) as f64;
    let (mut best, mut best_f) = (min, f64::NEG_INFINITY);
    for k in 0..GRID {
        let x = min + step * k as f64;
        let f = kde_at(&s, h, x);
        if f > best_f {
            best = x;
            best_f = f;
        }
    }
    // golden-section polish within one grid cell either side
    let (mut a, mut b) = ((best - step).max(min), (best + step).min(max));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (kde_at(&s, h, c), kde_at(&s, h, d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = kde_at(&s, h, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = kde_at(&s, h, d);
        }
    }
    let x = 0.5 * (a + b);
    Ok(if kde_at(&s, h, x) >= best_f { x } else { best })
}

/// Per-coordinate posterior modes.
pub fn posterior_mode(chains: &PosteriorChains) -> Result<PointEstimate, InferenceError> {
    if chains.len() < MIN_MODE_DRAWS {
        return Err(InferenceError::TooFewDraws { have: chains.len(), need: MIN_MODE_DRAWS });
    }
    let alpha = kde_mode(&chains.alpha)?;
    let gig = if chains.gig.is_empty() {
        None
    } else {
        Some(GigParams {
            lambda: kde_mode(&chains.lambda())?,
            kappa: kde_mode(&chains.kappa())?,
            eta: kde_mode(&chains.eta())?,
        })
    };
    Ok(PointEstimate { alpha, gig })
}

/// Shortest window holding `ceil(p N)` of the sorted samples.
pub fn hpd_interval(samples: &[f64], p: f64) -> Result<(f64, f64), InferenceError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(InferenceError::InvalidData(format!("HPD mass must lie in (0, 1), got {p}")));
    }
    if samples.len() < MIN_HPD_SAMPLES {
        return Err(InferenceError::TooFewDraws { have: samples.len(), need: MIN_HPD_SAMPLES });
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(InferenceError::InvalidData("NaN sample".into()));
    }
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(hpd_sorted(&s, p))
}

pub(crate) fn hpd_sorted(s: &[f64], p: f64) -> (f64, f64) {
    let n = s.len();
    let k = ((p * n as f64).ceil() as usize).clamp(1, n);
    let mut best = (s[0], s[k - 1]);
    for i in 1..=n - k {
        if s[i + k - 1] - s[i] < best.1 - best.0 {
            best = (s[i], s[i + k - 1]);
        }
    }
    best
}
