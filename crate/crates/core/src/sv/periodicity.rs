use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::spot::VolSeries;
use super::SvError;

/// Intraday factors indexed by (day of cycle, window position).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityFunction {
    pub cycle_length: usize,
    pub positions_per_day: usize,
    /// Relative length of each position; the last window of a day may be short.
    pub weights: Vec<f64>,
    pub factors: Vec<Vec<f64>>,
    /// Cells filled by interpolation because no window fell in them.
    pub interpolated: Vec<(usize, usize)>,
}

impl PeriodicityFunction {
    pub fn flat(cycle_length: usize, weights: Vec<f64>) -> Self {
        Self {
            cycle_length,
            positions_per_day: weights.len(),
            factors: vec![vec![1.0; weights.len()]; cycle_length],
            weights,
            interpolated: Vec::new(),
        }
    }

    pub fn factor(&self, cycle_day: usize, position: usize) -> f64 {
        self.factors[cycle_day % self.cycle_length][position.min(self.positions_per_day - 1)]
    }

    /// Weighted mean of each day's factors (1 after estimation).
    pub fn day_means(&self) -> Vec<f64> {
        let w: f64 = self.weights.iter().sum();
        self.factors.iter().map(|f| f.iter().zip(&self.weights).map(|(a, b)| a * b).sum::<f64>() / w).collect()
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn sd(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

/// Mean spot value relative to its day's average, per cycle cell.
///
/// Cells whose spread exceeds that of the whole sample average only values
/// below their 0.9-quantile. Each day of the cycle is then rescaled to unit
/// time-weighted mean.
pub fn estimate_periodicity(vs: &VolSeries, cycle_length: usize) -> Result<PeriodicityFunction, SvError> {
    if vs.is_empty() || cycle_length == 0 {
        return Err(SvError::Degenerate("periodicity needs windows and a positive cycle".into()));
    }
    let positions = vs.position.iter().max().copied().unwrap_or(0) + 1;
    let mut weights = vec![0.0f64; positions];
    for (p, d) in vs.position.iter().zip(&vs.durations) {
        weights[*p] = weights[*p].max(*d);
    }
    let wmax = weights.iter().cloned().fold(0.0, f64::max);
    for w in &mut weights {
        *w = if *w > 0.0 { *w / wmax } else { 1.0 };
    }

    let mut day_level: BTreeMap<i64, (f64, f64)> = BTreeMap::new();
    for i in 0..vs.len() {
        let e = day_level.entry(vs.day[i]).or_default();
        e.0 += vs.spot[i] * vs.durations[i];
        e.1 += vs.durations[i];
    }
    let mut cells: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); positions]; cycle_length];
    let mut all = Vec::with_capacity(vs.len());
    for i in 0..vs.len() {
        let (a, b) = day_level[&vs.day[i]];
        let r = vs.spot[i] / (a / b);
        cells[vs.cycle_day[i] % cycle_length][vs.position[i]].push(r);
        all.push(r);
    }
    let global_sd = sd(&all);

    let mut factors = vec![vec![f64::NAN; positions]; cycle_length];
    for c in 0..cycle_length {
        for p in 0..positions {
            let g = &mut cells[c][p];
            if g.is_empty() {
                continue;
            }
            g.sort_by(f64::total_cmp);
            let use_vals: Vec<f64> = if sd(g) > global_sd {
                let q = quantile(g, 0.9);
                let below: Vec<f64> = g.iter().copied().filter(|x| *x < q).collect();
                if below.is_empty() {
                    g.clone()
                } else {
                    below
                }
            } else {
                g.clone()
            };
            factors[c][p] = use_vals.iter().sum::<f64>() / use_vals.len() as f64;
        }
    }

    let mut interpolated = Vec::new();
    let filled: Vec<bool> = factors.iter().map(|f| f.iter().any(|v| v.is_finite())).collect();
    for c in 0..cycle_length {
        if !filled[c] {
            continue;
        }
        for p in 0..positions {
            if factors[c][p].is_finite() {
                continue;
            }
            let left = (0..p).rev().find(|&k| factors[c][k].is_finite());
            let right = (p + 1..positions).find(|&k| factors[c][k].is_finite());
            factors[c][p] = match (left, right) {
                (Some(l), Some(r)) => {
                    let t = (p - l) as f64 / (r - l) as f64;
                    factors[c][l] + t * (factors[c][r] - factors[c][l])
                }
                (Some(l), None) => factors[c][l],
                (None, Some(r)) => factors[c][r],
                (None, None) => 1.0,
            };
            interpolated.push((c, p));
        }
    }
    // a day of the cycle with no data borrows the average shape
    if filled.iter().any(|f| !f) {
        let have: Vec<usize> = (0..cycle_length).filter(|&c| filled[c]).collect();
        let avg: Vec<f64> = (0..positions)
            .map(|p| have.iter().map(|&c| factors[c][p]).sum::<f64>() / have.len() as f64)
            .collect();
        for c in 0..cycle_length {
            if !filled[c] {
                factors[c] = avg.clone();
                interpolated.extend((0..positions).map(|p| (c, p)));
            }
        }
    }

    let wsum: f64 = weights.iter().sum();
    for f in &mut factors {
        let m = f.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>() / wsum;
        f.iter_mut().for_each(|v| *v /= m);
    }
    if factors.iter().flatten().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(SvError::Degenerate("non-positive periodicity factor".into()));
    }
    Ok(PeriodicityFunction { cycle_length, positions_per_day: positions, weights, factors, interpolated })
}

/// Divides each spot value by its cycle factor.
pub fn deseasonalize(vs: &VolSeries, f: &PeriodicityFunction) -> VolSeries {
    let spot = (0..vs.len()).map(|i| vs.spot[i] / f.factor(vs.cycle_day[i], vs.position[i])).collect();
    vs.with_spot(spot)
}

/// Inverse of [`deseasonalize`].
pub fn reseasonalize(vs: &VolSeries, f: &PeriodicityFunction) -> VolSeries {
    let spot = (0..vs.len()).map(|i| vs.spot[i] * f.factor(vs.cycle_day[i], vs.position[i])).collect();
    vs.with_spot(spot)
}
