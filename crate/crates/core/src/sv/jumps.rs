use serde::{Deserialize, Serialize};

use super::returns::{windows, ReturnSeries};
use super::SvError;

/// What the `top_frac` quota is a fraction of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuotaBasis {
    /// `ceil(top_frac * W)` windows per pass.
    Windows,
    /// `ceil(top_frac * n)` windows per pass for `n` remaining returns, so
    /// that each pass removes about `top_frac` of the observations.
    Observations,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JumpConfig {
    pub window_minutes: u32,
    pub top_frac: f64,
    pub passes: usize,
    pub quota: QuotaBasis,
}

impl Default for JumpConfig {
    fn default() -> Self {
        Self {
            window_minutes: 15,
            top_frac: 0.001,
            passes: 2,
            quota: QuotaBasis::Observations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpPass {
    pub windows: usize,
    pub quota: usize,
    pub marked: Vec<usize>,
    /// The quota exceeded the windows with a positive statistic.
    pub short: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    pub passes: Vec<JumpPass>,
}

impl JumpReport {
    /// All marked indices into the input series, sorted.
    pub fn indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.passes.iter().flat_map(|p| p.marked.iter().copied()).collect();
        v.sort_unstable();
        v
    }
}

/// Flags windows by `max(RV - BPV, 0)`, marks the return farthest from its
/// window mean in each flagged window, deletes it and repeats.
pub fn detect_jumps(rs: &ReturnSeries, cfg: &JumpConfig) -> Result<JumpReport, SvError> {
    if !(cfg.top_frac > 0.0 && cfg.top_frac < 1.0) {
        return Err(SvError::InvalidConfig(format!("top_frac must lie in (0, 1), got {}", cfg.top_frac)));
    }
    let mut current = rs.clone();
    // positions of `current` in the input
    let mut origin: Vec<usize> = (0..rs.len()).collect();
    let mut report = JumpReport { passes: Vec::new() };
    for _ in 0..cfg.passes {
        let ws = windows(&current, cfg.window_minutes)?;
        if ws.is_empty() {
            break;
        }
        let mut stat: Vec<(f64, usize)> = ws
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let r = &current.returns[w.range.clone()];
                let rv: f64 = r.iter().map(|x| x * x).sum();
                let bpv = std::f64::consts::FRAC_PI_2 * r.windows(2).map(|p| p[0].abs() * p[1].abs()).sum::<f64>();
                ((rv - bpv).max(0.0), k)
            })
            .collect();
        let base = match cfg.quota {
            QuotaBasis::Windows => ws.len(),
            QuotaBasis::Observations => current.len(),
        };
        let quota = ((cfg.top_frac * base as f64).ceil() as usize).clamp(1, ws.len());
        stat.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let positive = stat.iter().take_while(|s| s.0 > 0.0).count();
        let mut local = Vec::new();
        for &(_, k) in stat.iter().take(quota.min(positive)) {
            let range = ws[k].range.clone();
            let r = &current.returns[range.clone()];
            let mean = r.iter().sum::<f64>() / r.len() as f64;
            let (j, _) = r
                .iter()
                .enumerate()
                .fold((0, -1.0), |best, (j, x)| if (x - mean).abs() > best.1 { (j, (x - mean).abs()) } else { best });
            local.push(range.start + j);
        }
        local.sort_unstable();
        let marked: Vec<usize> = local.iter().map(|&i| origin[i]).collect();
        report.passes.push(JumpPass { windows: ws.len(), quota, marked, short: positive < quota });
        current = current.without(&local);
        let mut keep = vec![true; origin.len()];
        for &i in &local {
            keep[i] = false;
        }
        origin = origin.into_iter().zip(keep).filter(|(_, k)| *k).map(|(o, _)| o).collect();
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sv::bars::{MinuteBar, Session};
    use crate::sv::returns::{compute_returns, TimeAxis};
    use chrono::{Duration, NaiveDate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    /// Minute bars over `days` weekdays with iid Gaussian log returns and
    /// the given `(bar index, log jump)` pairs added.
    fn series(days: usize, jumps: &[(usize, f64)]) -> ReturnSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noise = Normal::new(0.0, 1e-4).unwrap();
        let start = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
        let mut bars = Vec::new();
        let mut logp = 4.0;
        for d in 0..days {
            let date = start + Duration::days(d as i64);
            for m in 0..390 {
                logp += noise.sample(&mut rng);
                if let Some((_, j)) = jumps.iter().find(|(i, _)| *i == bars.len()) {
                    logp += j;
                }
                let p = f64::exp(logp);
                bars.push(MinuteBar {
                    timestamp: date.and_hms_opt(9, 30, 0).unwrap() + Duration::minutes(m),
                    open: p,
                    high: p,
                    low: p,
                    close: p,
                    volume: 1.0,
                });
            }
        }
        let axis = TimeAxis::new(start, Session::default(), 1.0).unwrap();
        compute_returns(&bars, &axis, 1, 1).unwrap()
    }

    #[test]
    fn injected_jumps_are_found() {
        // Bar i opens return i - 1 of its day; pick interior bars.
        let rs = series(3, &[(100, 0.01), (500, -0.008)]);
        let report = detect_jumps(&rs, &JumpConfig { top_frac: 0.002, passes: 1, ..Default::default() }).unwrap();
        let found = report.indices();
        let hits: Vec<f64> = found.iter().map(|&i| rs.returns[i]).collect();
        assert!(hits.iter().any(|r| (r - 0.01).abs() < 1e-3), "{hits:?}");
        assert!(hits.iter().any(|r| (r + 0.008).abs() < 1e-3), "{hits:?}");
    }

    #[test]
    fn quota_and_passes() {
        let rs = series(4, &[]);
        let cfg = JumpConfig { top_frac: 0.01, passes: 3, quota: QuotaBasis::Windows, ..Default::default() };
        let report = detect_jumps(&rs, &cfg).unwrap();
        assert_eq!(report.passes.len(), 3);
        let w = report.passes[0].windows;
        assert_eq!(report.passes[0].quota, ((0.01 * w as f64).ceil() as usize).max(1));
        let all = report.indices();
        let mut dedup = all.clone();
        dedup.dedup();
        assert_eq!(all, dedup, "an index is marked at most once");
        assert!(all.iter().all(|&i| i < rs.len()));
    }

    #[test]
    fn rejects_bad_fraction() {
        let rs = series(1, &[]);
        for f in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(detect_jumps(&rs, &JumpConfig { top_frac: f, ..Default::default() }).is_err());
        }
    }
}
