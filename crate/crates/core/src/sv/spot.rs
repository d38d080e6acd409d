use serde::{Deserialize, Serialize};

use super::returns::{realized_variance, ReturnSeries, Window};
use super::SvError;

/// Smallest spot value passed on to the GIG likelihood.
pub const SPOT_FLOOR: f64 = 1e-12;

/// Per-window integrated volatility and its spot derivative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolSeries {
    /// Window start times.
    pub times: Vec<f64>,
    pub durations: Vec<f64>,
    /// `H*` at the end of each window, counted from the first window.
    pub integrated: Vec<f64>,
    pub spot: Vec<f64>,
    /// Returns per window, the degrees of freedom of its RV.
    pub counts: Vec<usize>,
    pub day: Vec<i64>,
    pub cycle_day: Vec<usize>,
    pub position: Vec<usize>,
    /// Windows whose spot value was raised to the floor.
    pub floored: Vec<usize>,
}

impl VolSeries {
    pub fn len(&self) -> usize {
        self.spot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spot.is_empty()
    }

    /// Per-window increments of `H*`.
    pub fn increments(&self) -> Vec<f64> {
        self.spot.iter().zip(&self.durations).map(|(s, d)| s * d).collect()
    }

    /// Same windows with new spot values; `integrated` is rebuilt.
    pub fn with_spot(&self, spot: Vec<f64>) -> Self {
        let mut out = self.clone();
        out.integrated = cumulate(&spot, &self.durations);
        out.spot = spot;
        out
    }
}

fn cumulate(spot: &[f64], durations: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    spot.iter()
        .zip(durations)
        .map(|(s, d)| {
            acc += s * d;
            acc
        })
        .collect()
}

/// Realized variance per window as a measurement of `H*`.
pub fn integrated_vol(rs: &ReturnSeries, ws: &[Window]) -> Result<VolSeries, SvError> {
    if ws.is_empty() {
        return Err(SvError::Degenerate("no windows".into()));
    }
    let rv = realized_variance(rs, ws);
    let durations: Vec<f64> = ws.iter().map(Window::duration).collect();
    let mut floored = Vec::new();
    let spot: Vec<f64> = rv
        .iter()
        .zip(&durations)
        .enumerate()
        .map(|(i, (v, d))| {
            let s = v / d;
            if s < SPOT_FLOOR {
                floored.push(i);
                SPOT_FLOOR
            } else {
                s
            }
        })
        .collect();
    Ok(VolSeries {
        times: ws.iter().map(|w| w.start).collect(),
        integrated: cumulate(&spot, &durations),
        durations,
        spot,
        counts: ws.iter().map(|w| w.range.len()).collect(),
        day: ws.iter().map(|w| w.day).collect(),
        cycle_day: ws.iter().map(|w| w.cycle_day).collect(),
        position: ws.iter().map(|w| w.position).collect(),
        floored,
    })
}

/// Right-hand derivative of a cumulated `H*` at the window starts.
pub fn spot_from_integrated(integrated: &[f64], durations: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut prev = 0.0;
    let mut floored = Vec::new();
    let spot = integrated
        .iter()
        .zip(durations)
        .enumerate()
        .map(|(i, (h, d))| {
            let s = (h - prev) / d;
            prev = *h;
            if s < SPOT_FLOOR || !s.is_finite() {
                floored.push(i);
                SPOT_FLOOR
            } else {
                s
            }
        })
        .collect();
    (spot, floored)
}

/// How measured spot values are merged into the plateaus of a
/// piecewise-constant path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpotFilter {
    /// Runs of consecutive values closer than `eps` collapse to their mean.
    Collapse { eps: f64 },
    /// Penalized change-point segmentation under the chi-square law of RV;
    /// each segment takes its pooled level. The penalty per change point is
    /// `penalty_scale * ln N`.
    ChangePoint { penalty_scale: f64 },
    None,
}

impl Default for SpotFilter {
    fn default() -> Self {
        SpotFilter::Collapse { eps: 1e-5 }
    }
}

/// Chained collapse: value `i` joins the run of `i - 1` when they differ by
/// less than `eps`.
pub fn collapse_runs(spot: &[f64], eps: f64) -> Vec<f64> {
    let mut out = spot.to_vec();
    let mut i = 0;
    while i < spot.len() {
        let mut j = i + 1;
        while j < spot.len() && (spot[j] - spot[j - 1]).abs() < eps {
            j += 1;
        }
        if j - i > 1 {
            let m = spot[i..j].iter().sum::<f64>() / (j - i) as f64;
            out[i..j].iter_mut().for_each(|v| *v = m);
        }
        i = j;
    }
    out
}

/// Exact PELT segmentation of `spot` where window `i` carries
/// `counts[i] / 2` Gamma shape. Returns segment end indices (exclusive).
pub fn change_points(spot: &[f64], counts: &[usize], penalty: f64) -> Vec<usize> {
    let n = spot.len();
    let mut ck = vec![0.0; n + 1];
    let mut cs = vec![0.0; n + 1];
    for i in 0..n {
        let k = counts[i].max(1) as f64;
        ck[i + 1] = ck[i] + k;
        cs[i + 1] = cs[i] + k * spot[i];
    }
    let cost = |a: usize, b: usize| {
        let k = ck[b] - ck[a];
        0.5 * k * ((cs[b] - cs[a]) / k).max(SPOT_FLOOR).ln()
    };
    let mut f = vec![0.0; n + 1];
    f[0] = -penalty;
    let mut last = vec![0usize; n + 1];
    let mut candidates: Vec<usize> = vec![0];
    for t in 1..=n {
        let (best, arg) = candidates
            .iter()
            .map(|&s| (f[s] + cost(s, t) + penalty, s))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
        f[t] = best;
        last[t] = arg;
        candidates.retain(|&s| f[s] + cost(s, t) <= f[t]);
        candidates.push(t);
    }
    let mut ends = Vec::new();
    let mut t = n;
    while t > 0 {
        ends.push(t);
        t = last[t];
    }
    ends.reverse();
    ends
}

/// Count-weighted mean level per segment.
pub fn segment_levels(spot: &[f64], counts: &[usize], ends: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; spot.len()];
    let mut a = 0;
    for &b in ends {
        let k: f64 = counts[a..b].iter().map(|c| c.max(&1)).sum::<usize>() as f64;
        let m = (a..b).map(|i| counts[i].max(1) as f64 * spot[i]).sum::<f64>() / k;
        out[a..b].iter_mut().for_each(|v| *v = m);
        a = b;
    }
    out
}

/// Applies `filter` to the spot values of `vs`.
pub fn spot_vol_filter(vs: &VolSeries, filter: &SpotFilter) -> Result<VolSeries, SvError> {
    let spot = match *filter {
        SpotFilter::None => vs.spot.clone(),
        SpotFilter::Collapse { eps } => {
            if !(eps >= 0.0) {
                return Err(SvError::InvalidConfig(format!("collapse eps must be non-negative, got {eps}")));
            }
            collapse_runs(&vs.spot, eps)
        }
        SpotFilter::ChangePoint { penalty_scale } => {
            if !(penalty_scale > 0.0) {
                return Err(SvError::InvalidConfig(format!("penalty scale must be positive, got {penalty_scale}")));
            }
            let penalty = penalty_scale * (vs.len().max(2) as f64).ln();
            let ends = change_points(&vs.spot, &vs.counts, penalty);
            segment_levels(&vs.spot, &vs.counts, &ends)
        }
    };
    Ok(vs.with_spot(spot.into_iter().map(|s| s.max(SPOT_FLOOR)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_integrated_gives_constant_spot() {
        let d = vec![0.5; 6];
        let h: Vec<f64> = (1..=6).map(|i| 1.5 * i as f64).collect();
        let (s, fl) = spot_from_integrated(&h, &d);
        assert!(fl.is_empty());
        assert!(s.iter().all(|v| (v - 3.0).abs() < 1e-14));
    }

    #[test]
    fn close_values_collapse_to_mean() {
        let out = collapse_runs(&[1.0, 1.0 + 1e-6, 2.0], 1e-5);
        assert!((out[0] - (1.0 + 5e-7)).abs() < 1e-15);
        assert_eq!(out[0], out[1]);
        assert_eq!(out[2], 2.0);
    }

    #[test]
    fn collapse_chains_whole_run() {
        let out = collapse_runs(&[1.0, 1.000004, 1.000008, 1.000012, 5.0], 1e-5);
        assert!(out[..4].iter().all(|v| (v - 1.000006).abs() < 1e-12));
    }

    #[test]
    fn change_points_find_obvious_levels() {
        let mut spot = vec![1.0; 50];
        spot.extend(vec![4.0; 50]);
        let counts = vec![15; 100];
        let ends = change_points(&spot, &counts, 10.0);
        assert_eq!(ends, vec![50, 100]);
        let lv = segment_levels(&spot, &counts, &ends);
        assert_eq!(lv[10], 1.0);
        assert_eq!(lv[90], 4.0);
    }

    #[test]
    fn negative_spot_is_floored() {
        let (s, fl) = spot_from_integrated(&[1.0, 0.5, 2.0], &[1.0, 1.0, 1.0]);
        assert_eq!(fl, vec![1]);
        assert_eq!(s[1], SPOT_FLOOR);
    }
}
