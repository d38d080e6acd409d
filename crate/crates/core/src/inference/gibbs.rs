use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Gamma as GammaLaw, Normal};

use super::data::{MarginalFamily, ObservationSeries, Priors, QModel};
use super::estimators::estimate_ndnj;
use super::likelihood::{fit_gig, ln_jump_weight, log_add};
use super::InferenceError;
use crate::gig::{GigParams, GigSuffStats};
use crate::numerics::{arms_sample, log_bessel_k, ArmsOptions, ArmsState};

const QUANTILES: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];
const LAMBDA_SUPPORT: (f64, f64) = (-60.0, 60.0);

/// How the fresh-draw indicators are updated inside a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentPolicy {
    /// `z_i = 1` exactly when `x_i != x_{i-1}`; repeats are taken as "no jump".
    Observed,
    /// Repeats draw `z_i ~ Bernoulli(p_i)` given the current parameters.
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsConfig {
    pub iters: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// `None` picks the variant's default: sampled for Gibbs-a, observed for Gibbs-b.
    pub latent: Option<LatentPolicy>,
    /// Keep the full indicator vector of every retained draw.
    pub keep_z: bool,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            iters: 5000,
            burn_in: 1000,
            thin: 1,
            latent: None,
            keep_z: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GibbsVariant {
    /// `alpha` drawn by ARMS from its full conditional.
    A,
    /// `alpha` drawn from the Gamma law of the renewal-time augmentation.
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorChains {
    pub variant: GibbsVariant,
    pub alpha: Vec<f64>,
    /// Empty for the uniform family.
    pub gig: Vec<GigParams>,
    /// Number of fresh draws `sum_{i>=1} z_i` per retained sweep.
    pub m: Vec<usize>,
    pub z: Option<Vec<Vec<bool>>>,
    pub burn_in: usize,
    pub thinning: usize,
}

impl PosteriorChains {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn lambda(&self) -> Vec<f64> {
        self.gig.iter().map(|p| p.lambda).collect()
    }

    pub fn kappa(&self) -> Vec<f64> {
        self.gig.iter().map(|p| p.kappa).collect()
    }

    pub fn eta(&self) -> Vec<f64> {
        self.gig.iter().map(|p| p.eta).collect()
    }
}

/// One draw from `Gamma(m + 1, j_m + c)` (shape, rate).
pub fn draw_alpha_gamma<R: Rng>(m: usize, j_m: f64, c: f64, rng: &mut R) -> f64 {
    Gamma::new(m as f64 + 1.0, 1.0 / (j_m + c))
        .expect("positive shape and rate")
        .sample(rng)
}

/// Log full conditional of `alpha` given the indicators:
/// `sum_{z=1} log(1 - e^{-alpha t_i}) - alpha (sum_{z=0} t_i + c)`.
#[derive(Debug, Clone)]
pub struct AlphaConditional {
    /// Gaps of fresh draws, kept as (gap, multiplicity).
    jump_gaps: Vec<(f64, f64)>,
    linear: f64,
}

impl AlphaConditional {
    pub fn new(gaps: &[f64], z: &[bool], c: f64) -> Self {
        let mut jump: Vec<f64> = Vec::new();
        let mut stay = 0.0;
        for (t, zi) in gaps.iter().zip(z) {
            if *zi {
                jump.push(*t);
            } else {
                stay += t;
            }
        }
        jump.sort_by(f64::total_cmp);
        let mut grouped: Vec<(f64, f64)> = Vec::new();
        for t in jump {
            match grouped.last_mut() {
                Some((g, k)) if *g == t => *k += 1.0,
                _ => grouped.push((t, 1.0)),
            }
        }
        Self {
            jump_gaps: grouped,
            linear: stay + c,
        }
    }

    pub fn ln_density(&self, alpha: f64) -> f64 {
        if !(alpha > 0.0) {
            return f64::NEG_INFINITY;
        }
        self.jump_gaps.iter().map(|(t, k)| k * ln_jump_weight(alpha, *t)).sum::<f64>() - alpha * self.linear
    }
}

/// Log full conditionals of the three GIG parameters given the weighted
/// statistics of the fresh draws (the start included).
#[derive(Debug, Clone, Copy)]
pub struct GigConditionals {
    pub stats: GigSuffStats,
    pub priors: Priors,
}

impl GigConditionals {
    pub fn ln_lambda(&self, lambda: f64, kappa: f64, eta: f64) -> f64 {
        let s = &self.stats;
        let Ok(lk) = log_bessel_k(lambda, kappa) else {
            return f64::NEG_INFINITY;
        };
        -s.m * lk - lambda * s.m * eta.ln() + (lambda - 1.0) * s.s1
            - (lambda - self.priors.mu_lambda).powi(2) / (2.0 * self.priors.sigma2_lambda)
    }

    pub fn ln_kappa(&self, lambda: f64, kappa: f64, eta: f64) -> f64 {
        if !(kappa > 0.0) {
            return f64::NEG_INFINITY;
        }
        let s = &self.stats;
        let Ok(lk) = log_bessel_k(lambda, kappa) else {
            return f64::NEG_INFINITY;
        };
        -s.m * lk - 0.5 * kappa * (eta * s.s2 + s.s3 / eta) + (self.priors.a_kappa - 1.0) * kappa.ln()
            - self.priors.b_kappa * kappa
    }

    pub fn ln_eta(&self, lambda: f64, kappa: f64, eta: f64) -> f64 {
        if !(eta > 0.0) {
            return f64::NEG_INFINITY;
        }
        let s = &self.stats;
        -lambda * s.m * eta.ln() - 0.5 * kappa * (eta * s.s2 + s.s3 / eta) + (self.priors.a_eta - 1.0) * eta.ln()
            - self.priors.b_eta * eta
    }
}

fn gamma_quantiles(shape: f64, rate: f64) -> Vec<f64> {
    let law = GammaLaw::new(shape, rate).expect("validated priors");
    QUANTILES.iter().map(|p| law.inverse_cdf(*p)).collect()
}

fn normal_quantiles(mu: f64, sigma2: f64) -> Vec<f64> {
    let law = Normal::new(mu, sigma2.sqrt()).expect("validated priors");
    QUANTILES.iter().map(|p| law.inverse_cdf(*p)).collect()
}

/// Support of a scalar block.
#[derive(Debug, Clone, Copy)]
pub enum Block {
    Interval(f64, f64),
    /// `(0, inf)`, sampled as `u = ln x` with density `f(e^u) e^u`.
    Positive,
}

/// One ARMS update of a scalar block, building a fresh envelope from the
/// prior quantiles and the current value. If the envelope cannot be built
/// or yields no draw, it is rebuilt once from abscissae spread around the
/// current value before giving up.
pub fn arms_update<F: Fn(f64) -> f64, R: Rng>(
    f: &F,
    block: Block,
    prior_q: &[f64],
    current: f64,
    rng: &mut R,
    name: &str,
) -> Result<f64, InferenceError> {
    let fail = |e: crate::numerics::NumericsError| InferenceError::Sampler(format!("{name}: {e}"));
    match block {
        Block::Interval(lo, hi) => {
            let spread = current.abs().max(1e-3);
            draw_with_retry(f, (lo, hi), prior_q, current, spread, rng).map_err(fail)
        }
        Block::Positive => {
            let g = |u: f64| {
                let x = u.exp();
                if x > 0.0 && x.is_finite() {
                    f(x) + u
                } else {
                    f64::NEG_INFINITY
                }
            };
            let q: Vec<f64> = prior_q.iter().filter(|v| **v > 0.0).map(|v| v.ln()).collect();
            let u = draw_with_retry(&g, (f64::NEG_INFINITY, f64::INFINITY), &q, current.ln(), 1.0, rng).map_err(fail)?;
            Ok(u.exp())
        }
    }
}

fn draw_with_retry<F: Fn(f64) -> f64, R: Rng>(
    f: &F,
    support: (f64, f64),
    prior_q: &[f64],
    current: f64,
    spread: f64,
    rng: &mut R,
) -> Result<f64, crate::numerics::NumericsError> {
    let mut pts: Vec<f64> = prior_q.to_vec();
    pts.push(current);
    let first = ArmsState::new(f, support, &pts, current, ArmsOptions::default())
        .and_then(|mut st| arms_sample(f, &mut st, rng));
    if first.is_ok() {
        return first;
    }
    let wide: Vec<f64> = [-2.0, -0.5, -0.1, -0.01, 0.0, 0.01, 0.1, 0.5, 2.0]
        .iter()
        .map(|k| current + k * spread)
        .filter(|x| *x > support.0 && *x < support.1)
        .collect();
    let mut st = ArmsState::new(f, support, &wide, current, ArmsOptions::default())?;
    arms_sample(f, &mut st, rng)
}

/// Draws `(lambda, kappa, eta)` in turn from their full conditionals.
pub fn sample_gig_block<R: Rng>(
    cond: &GigConditionals,
    current: GigParams,
    rng: &mut R,
) -> Result<GigParams, InferenceError> {
    let pr = &cond.priors;
    let GigParams { mut lambda, mut kappa, mut eta } = current;
    lambda = arms_update(
        &|l| cond.ln_lambda(l, kappa, eta),
        Block::Interval(LAMBDA_SUPPORT.0, LAMBDA_SUPPORT.1),
        &normal_quantiles(pr.mu_lambda, pr.sigma2_lambda),
        lambda,
        rng,
        "lambda",
    )?;
    kappa = arms_update(
        &|k| cond.ln_kappa(lambda, k, eta),
        Block::Positive,
        &gamma_quantiles(pr.a_kappa, pr.b_kappa),
        kappa,
        rng,
        "kappa",
    )?;
    eta = arms_update(
        &|e| cond.ln_eta(lambda, kappa, e),
        Block::Positive,
        &gamma_quantiles(pr.a_eta, pr.b_eta),
        eta,
        rng,
        "eta",
    )?;
    Ok(GigParams { lambda, kappa, eta })
}

fn initial_state(obs: &ObservationSeries, family: &MarginalFamily, priors: &Priors) -> (f64, Option<GigParams>) {
    let nd = if obs.n() >= 1 { estimate_ndnj(obs, family).ok() } else { None };
    let alpha = nd.as_ref().map(|e| e.alpha).filter(|a| *a > 0.0).unwrap_or(1.0 / priors.c);
    let gig = match family {
        MarginalFamily::Gig => Some(
            nd.and_then(|e| e.gig)
                .or_else(|| fit_gig(&GigSuffStats::from_values(obs.values().iter().copied())).ok().map(|r| r.0))
                .unwrap_or(GigParams {
                    lambda: priors.mu_lambda,
                    kappa: priors.a_kappa / priors.b_kappa,
                    eta: priors.a_eta / priors.b_eta,
                }),
        ),
        MarginalFamily::DiscreteUniform { .. } => None,
    };
    (alpha, gig)
}

/// Runs one Gibbs chain. See [`gibbs_a`] and [`gibbs_b`].
pub fn gibbs<R: Rng>(
    obs: &ObservationSeries,
    priors: &Priors,
    family: &MarginalFamily,
    variant: GibbsVariant,
    cfg: &GibbsConfig,
    rng: &mut R,
) -> Result<PosteriorChains, InferenceError> {
    priors.validate()?;
    if cfg.iters <= cfg.burn_in {
        return Err(InferenceError::InvalidData("iterations must exceed burn-in".into()));
    }
    if matches!(family, MarginalFamily::Gig) && obs.values().iter().any(|v| !(*v > 0.0)) {
        return Err(InferenceError::InvalidData("GIG family needs positive observations".into()));
    }
    let thin = cfg.thin.max(1);
    let policy = cfg.latent.unwrap_or(match variant {
        GibbsVariant::A => LatentPolicy::Sampled,
        GibbsVariant::B => LatentPolicy::Observed,
    });
    let n = obs.n();
    let x = obs.values();
    let times = obs.times();
    let gaps = obs.gaps();
    let (mut alpha, mut gig) = initial_state(obs, family, priors);
    let uniform_q = match family {
        MarginalFamily::DiscreteUniform { .. } => Some(QModel::for_family(family, obs, None)?),
        MarginalFamily::Gig => None,
    };
    let alpha_q: Vec<f64> = QUANTILES.iter().map(|p| -(1.0 - p).ln() / priors.c).collect();

    // z[i] for i = 1..=n stored at index i - 1
    let mut z: Vec<bool> = (1..=n).map(|i| !obs.is_repeat(i)).collect();
    let mut chains = PosteriorChains {
        variant,
        alpha: Vec::new(),
        gig: Vec::new(),
        m: Vec::new(),
        z: cfg.keep_z.then(Vec::new),
        burn_in: cfg.burn_in,
        thinning: thin,
    };

    for it in 0..cfg.iters {
        if policy == LatentPolicy::Sampled {
            let q = match (&uniform_q, gig) {
                (Some(q), _) => q.clone(),
                (None, Some(p)) => QModel::gig(p)?,
                (None, None) => unreachable!("GIG chains carry parameters"),
            };
            for i in 1..=n {
                if obs.is_repeat(i) {
                    let t = gaps[i - 1];
                    let jump = ln_jump_weight(alpha, t) + q.ln_q(x[i]);
                    let p = (jump - log_add(jump, -alpha * t)).exp();
                    z[i - 1] = rng.random::<f64>() < p;
                }
            }
        }

        let m = z.iter().filter(|v| **v).count();
        alpha = match variant {
            GibbsVariant::B => {
                let last = z.iter().rposition(|v| *v).map(|k| times[k + 1] - times[0]).unwrap_or(0.0);
                draw_alpha_gamma(m, last, priors.c, rng)
            }
            GibbsVariant::A => {
                let cond = AlphaConditional::new(&gaps, &z, priors.c);
                arms_update(&|a| cond.ln_density(a), Block::Positive, &alpha_q, alpha, rng, "alpha")?
            }
        };

        if let Some(cur) = gig {
            let mut stats = GigSuffStats::default();
            stats.push(x[0], 1.0);
            for i in 1..=n {
                if z[i - 1] {
                    stats.push(x[i], 1.0);
                }
            }
            let cond = GigConditionals { stats, priors: *priors };
            gig = Some(sample_gig_block(&cond, cur, rng)?);
        }

        if it >= cfg.burn_in && (it - cfg.burn_in) % thin == 0 {
            chains.alpha.push(alpha);
            if let Some(p) = gig {
                chains.gig.push(p);
            }
            chains.m.push(m);
            if let Some(zs) = chains.z.as_mut() {
                zs.push(z.clone());
            }
        }
    }
    Ok(chains)
}

/// Gibbs sampler with ARMS for `alpha` and sampled indicators.
pub fn gibbs_a<R: Rng>(
    obs: &ObservationSeries,
    priors: &Priors,
    family: &MarginalFamily,
    cfg: &GibbsConfig,
    rng: &mut R,
) -> Result<PosteriorChains, InferenceError> {
    gibbs(obs, priors, family, GibbsVariant::A, cfg, rng)
}

/// Gibbs sampler with the renewal-time Gamma update for `alpha`.
pub fn gibbs_b<R: Rng>(
    obs: &ObservationSeries,
    priors: &Priors,
    family: &MarginalFamily,
    cfg: &GibbsConfig,
    rng: &mut R,
) -> Result<PosteriorChains, InferenceError> {
    gibbs(obs, priors, family, GibbsVariant::B, cfg, rng)
}

/// Runs `chains` independent chains in parallel on substreams of `seed`.
pub fn gibbs_parallel(
    obs: &ObservationSeries,
    priors: &Priors,
    family: &MarginalFamily,
    variant: GibbsVariant,
    cfg: &GibbsConfig,
    seed: u64,
    chains: usize,
) -> Result<Vec<PosteriorChains>, InferenceError> {
    use rayon::prelude::*;
    (0..chains as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k);
            gibbs(obs, priors, family, variant, cfg, &mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_indicator_gamma_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| draw_alpha_gamma(5, 2.0, 1.0, &mut rng)).collect();
        let m = crate::numerics::stats::mean(&draws);
        let v = crate::numerics::stats::variance(&draws);
        assert!((m - 2.0).abs() < 3.0 * (6.0f64 / 9.0 / n as f64).sqrt());
        assert!((v - 6.0 / 9.0).abs() < 0.02);
    }

    #[test]
    fn single_stay_conditional_is_exponential() {
        let cond = AlphaConditional::new(&[0.7], &[false], 1.0);
        let d = cond.ln_density(2.0) - cond.ln_density(1.0);
        assert!((d + 1.7).abs() < 1e-14);
    }

    #[test]
    fn prior_only_run() {
        let obs = ObservationSeries::new(vec![0.0], vec![1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = GibbsConfig { iters: 20_000, burn_in: 100, ..Default::default() };
        let ch = gibbs_b(&obs, &Priors::default(), &MarginalFamily::DiscreteUniform { support: None }, &cfg, &mut rng).unwrap();
        let m = crate::numerics::stats::mean(&ch.alpha);
        assert!((m - 1.0).abs() < 3.0 / (ch.len() as f64).sqrt(), "{m}");
    }

    #[test]
    fn iterations_must_exceed_burn_in() {
        let obs = ObservationSeries::new(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = GibbsConfig { iters: 10, burn_in: 10, ..Default::default() };
        assert!(gibbs_a(&obs, &Priors::default(), &MarginalFamily::Gig, &cfg, &mut rng).is_err());
    }
}
