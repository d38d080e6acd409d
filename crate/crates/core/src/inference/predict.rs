use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::{MarginalFamily, ObservationSeries};
use super::gibbs::PosteriorChains;
use super::summary::hpd_sorted;
use super::InferenceError;
use crate::harris::{simulate_from, Marginal, SfHarrisParams, Trajectory};

/// Forward paths from the last observation, one posterior draw per path.
///
/// Each path picks a retained sweep uniformly at random and simulates the
/// process from `(t_n, x_n)` to `horizon` under that draw. Paths are
/// independent streams of a base seed taken from `rng`.
pub fn predict_trajectories<R: Rng>(
    obs: &ObservationSeries,
    chains: &PosteriorChains,
    family: &MarginalFamily,
    horizon: f64,
    m_paths: usize,
    rng: &mut R,
) -> Result<Vec<Trajectory>, InferenceError> {
    if chains.is_empty() {
        return Err(InferenceError::InvalidData("empty posterior chains".into()));
    }
    let (tn, xn) = obs.last();
    if !(horizon >= tn) {
        return Err(InferenceError::InvalidData(format!("horizon {horizon} precedes the last observation {tn}")));
    }
    let support = match family {
        MarginalFamily::DiscreteUniform { .. } => family.uniform_support(obs),
        MarginalFamily::Gig => {
            if chains.gig.len() != chains.len() {
                return Err(InferenceError::InvalidData("chains lack GIG draws".into()));
            }
            None
        }
    };
    let base: u64 = rng.random();
    (0..m_paths as u64)
        .into_par_iter()
        .map(|k| {
            let mut r = ChaCha8Rng::seed_from_u64(base);
            r.set_stream(k);
            let d = r.random_range(0..chains.len());
            let marginal = match &support {
                Some(s) => Marginal::discrete_uniform(s.clone())?,
                None => Marginal::gig(chains.gig[d])?,
            };
            let p = SfHarrisParams::new(chains.alpha[d], marginal)?;
            Ok(simulate_from(&p, tn, xn, horizon, &mut r, 0.0)?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstJumpSummary {
    /// Mean delay to the first redraw among paths that jump before the horizon.
    pub mean_observed: f64,
    /// Paths with no redraw before the horizon.
    pub censored: usize,
    /// Posterior mean of `1/alpha`, the exact mean delay.
    pub mean_from_alpha: f64,
    /// `(d, fraction of paths jumping within d, E[1 - e^{-alpha d}])`.
    pub within: Vec<(f64, f64, f64)>,
}

pub fn first_jump_summary(paths: &[Trajectory], chains: &PosteriorChains, within: &[f64]) -> FirstJumpSummary {
    let delays: Vec<Option<f64>> = paths.iter().map(|p| p.jump_times.first().map(|t| t - p.origin)).collect();
    let seen: Vec<f64> = delays.iter().flatten().copied().collect();
    let n = paths.len().max(1) as f64;
    let na = chains.alpha.len().max(1) as f64;
    FirstJumpSummary {
        mean_observed: if seen.is_empty() { f64::NAN } else { seen.iter().sum::<f64>() / seen.len() as f64 },
        censored: delays.len() - seen.len(),
        mean_from_alpha: chains.alpha.iter().map(|a| 1.0 / a).sum::<f64>() / na,
        within: within
            .iter()
            .map(|d| {
                let frac = seen.iter().filter(|s| **s <= *d).count() as f64 / n;
                let exact = chains.alpha.iter().map(|a| -(-a * d).exp_m1()).sum::<f64>() / na;
                (*d, frac, exact)
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HpdBand {
    pub time: f64,
    pub lo: f64,
    pub hi: f64,
    pub median: f64,
}

/// Pointwise HPD intervals of the path values on a time grid.
pub fn pointwise_hpd(paths: &[Trajectory], grid: &[f64], p: f64) -> Result<Vec<HpdBand>, InferenceError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(InferenceError::InvalidData(format!("HPD mass must lie in (0, 1), got {p}")));
    }
    if paths.len() < super::summary::MIN_HPD_SAMPLES {
        return Err(InferenceError::TooFewDraws { have: paths.len(), need: super::summary::MIN_HPD_SAMPLES });
    }
    grid.iter()
        .map(|t| {
            let mut v = paths.iter().map(|p| p.value_at(*t)).collect::<Result<Vec<_>, _>>()?;
            v.sort_by(f64::total_cmp);
            let (lo, hi) = hpd_sorted(&v, p);
            Ok(HpdBand { time: *t, lo, hi, median: crate::numerics::stats::quantile_sorted(&v, 0.5) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inference::gibbs::GibbsVariant;

    fn point_chain(alpha: f64, n: usize) -> PosteriorChains {
        PosteriorChains {
            variant: GibbsVariant::B,
            alpha: vec![alpha; n],
            gig: Vec::new(),
            m: vec![0; n],
            z: None,
            burn_in: 0,
            thinning: 1,
        }
    }

    #[test]
    fn degenerate_alpha_first_jump() {
        let obs = ObservationSeries::new(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        let ch = point_chain(0.7, 10);
        let fam = MarginalFamily::DiscreteUniform { support: Some(vec![1.0, 2.0, 3.0]) };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let paths = predict_trajectories(&obs, &ch, &fam, 30.0, 40_000, &mut rng).unwrap();
        assert!(paths.iter().all(|p| p.origin == 1.0 && p.start == 2.0));
        let s = first_jump_summary(&paths, &ch, &[1.0]);
        let exact = 1.0 - (-0.7f64).exp();
        assert!((s.within[0].2 - exact).abs() < 1e-14);
        let se = (exact * (1.0 - exact) / 40_000.0).sqrt();
        assert!((s.within[0].1 - exact).abs() < 4.0 * se);
    }

    #[test]
    fn horizon_at_last_observation() {
        let obs = ObservationSeries::new(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        let fam = MarginalFamily::DiscreteUniform { support: None };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let paths = predict_trajectories(&obs, &point_chain(3.0, 5), &fam, 1.0, 10, &mut rng).unwrap();
        assert!(paths.iter().all(|p| p.jump_times.is_empty()));
        assert!(predict_trajectories(&obs, &point_chain(3.0, 5), &fam, 0.5, 10, &mut rng).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let obs = ObservationSeries::new(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        let fam = MarginalFamily::DiscreteUniform { support: None };
        let a = predict_trajectories(&obs, &point_chain(1.0, 5), &fam, 5.0, 50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = predict_trajectories(&obs, &point_chain(1.0, 5), &fam, 5.0, 50, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }
}
