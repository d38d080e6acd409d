use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bars::MinuteBar;
use super::clean::clean_bars;
use super::fit::SvFit;
use super::returns::{compute_returns, windows, ReturnSeries};
use super::SvError;
use crate::harris::integrate_at_times;
use crate::inference::{predict_trajectories, MarginalFamily};

pub const TABLE_PROBS: [f64; 6] = [0.25, 0.50, 0.75, 0.85, 0.90, 0.95];

/// Quantity whose predictive HPD interval is checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageTarget {
    /// Each holdout window return against the law of that window's return.
    Returns,
    /// Cumulative log price since the end of estimation.
    LogPrice,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub p: f64,
    pub coverage: f64,
    pub inside: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageTable {
    pub target: CoverageTarget,
    pub paths: usize,
    pub rows: Vec<CoverageRow>,
}

impl CoverageTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("p,coverage,inside,total\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", r.p, r.coverage, r.inside, r.total));
        }
        s
    }
}

/// Holdout returns on the fitted clock, cleaned like the estimation data.
pub fn holdout_returns(fit: &SvFit, bars: &[MinuteBar]) -> Result<ReturnSeries, SvError> {
    let cleaned = if fit.config.clean { clean_bars(bars, &fit.config.session).bars } else { bars.to_vec() };
    compute_returns(&cleaned, &fit.axis, fit.config.sampling_minutes, fit.config.cycle_length())
}

/// Simulated window returns, one row per path.
///
/// Each path takes a posterior draw of the volatility process from the last
/// adjusted spot observation, multiplies its integral over each window by
/// the periodicity factor, and draws `N(mu h + beta H, H)` with `(mu, beta)`
/// from their posterior.
pub fn simulate_window_returns<R: Rng>(
    fit: &SvFit,
    holdout: &ReturnSeries,
    m_paths: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), SvError> {
    let ws = windows(holdout, fit.config.window_minutes)?;
    let Some(last) = ws.last() else {
        return Err(SvError::InvalidBars("empty holdout".into()));
    };
    let (tn, _) = fit.observations.last();
    if ws[0].start < tn {
        return Err(SvError::InvalidConfig("holdout must follow the estimation period".into()));
    }
    let actual: Vec<f64> = ws.iter().map(|w| holdout.returns[w.range.clone()].iter().sum()).collect();
    let paths = predict_trajectories(&fit.observations, &fit.chains, &MarginalFamily::Gig, last.end, m_paths, rng)
        .map_err(|e| SvError::Stage { stage: "predict", message: e.to_string() })?;
    let mut grid = Vec::with_capacity(2 * ws.len());
    for w in &ws {
        grid.push(w.start);
        grid.push(w.end);
    }
    let factors: Vec<f64> = ws.iter().map(|w| fit.factor(w.cycle_day, w.position)).collect();
    let base: u64 = rng.random();
    let sims = paths
        .par_iter()
        .enumerate()
        .map(|(k, path)| {
            let mut r = ChaCha8Rng::seed_from_u64(base);
            r.set_stream(k as u64);
            let (mu, beta) = fit.mu_beta.sample(&mut r);
            let h = integrate_at_times(path, &grid).map_err(|e| SvError::Degenerate(e.to_string()))?;
            Ok(ws
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    let v = factors[i] * (h[2 * i + 1] - h[2 * i]);
                    let z: f64 = StandardNormal.sample(&mut r);
                    mu * w.duration() + beta * v + v.sqrt() * z
                })
                .collect())
        })
        .collect::<Result<Vec<Vec<f64>>, SvError>>()?;
    Ok((actual, sims))
}

fn shortest(sorted: &[f64], p: f64) -> (f64, f64) {
    let n = sorted.len();
    let k = ((p * n as f64).ceil() as usize).clamp(1, n);
    let mut best = (sorted[0], sorted[k - 1]);
    for i in 1..=n - k {
        if sorted[i + k - 1] - sorted[i] < best.1 - best.0 {
            best = (sorted[i], sorted[i + k - 1]);
        }
    }
    best
}

/// Fraction of holdout values inside the pointwise predictive HPD interval
/// of each mass in `probs`.
pub fn forecast_coverage<R: Rng>(
    fit: &SvFit,
    holdout: &ReturnSeries,
    probs: &[f64],
    m_paths: usize,
    target: CoverageTarget,
    rng: &mut R,
) -> Result<CoverageTable, SvError> {
    if probs.iter().any(|p| !(*p > 0.0 && *p < 1.0)) {
        return Err(SvError::InvalidConfig("HPD masses must lie in (0, 1)".into()));
    }
    if m_paths == 0 {
        return Err(SvError::InvalidConfig("need at least one forecast path".into()));
    }
    let (mut actual, mut sims) = simulate_window_returns(fit, holdout, m_paths, rng)?;
    if target == CoverageTarget::LogPrice {
        let cum = |v: &mut Vec<f64>| {
            let mut acc = 0.0;
            v.iter_mut().for_each(|x| {
                acc += *x;
                *x = acc;
            });
        };
        cum(&mut actual);
        sims.iter_mut().for_each(cum);
    }
    let n = actual.len();
    let inside: Vec<Vec<bool>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut col: Vec<f64> = sims.iter().map(|s| s[i]).collect();
            col.sort_by(f64::total_cmp);
            probs
                .iter()
                .map(|&p| {
                    let (lo, hi) = shortest(&col, p);
                    actual[i] >= lo && actual[i] <= hi
                })
                .collect()
        })
        .collect();
    let rows = probs
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let k = inside.iter().filter(|v| v[j]).count();
            CoverageRow { p, coverage: k as f64 / n as f64, inside: k, total: n }
        })
        .collect();
    Ok(CoverageTable { target, paths: m_paths, rows })
}
