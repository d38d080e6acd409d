//! SF-Harris process: exact transitions, path simulation, the integrated
//! process and the semi-Markov and mixture generalizations.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp, Exp1, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gig::{GigDensity, GigError, GigParams, GigSampler};
use crate::numerics::{quad_integrate, NumericsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarrisError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("time {t} outside [{origin}, {horizon}]")]
    TimeOutOfRange { t: f64, origin: f64, horizon: f64 },
    #[error("expectation under Q is not finite")]
    NonFiniteExpectation,
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error(transparent)]
    Gig(#[from] GigError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

type SamplerFn = dyn Fn(&mut dyn RngCore) -> f64 + Send + Sync;
type DensityFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A user-supplied marginal law given by a sampler and a density.
#[derive(Clone)]
pub struct CustomMarginal {
    pub name: String,
    pub sampler: Arc<SamplerFn>,
    pub pdf: Arc<DensityFn>,
    /// Support of the density; either end may be infinite.
    pub support: (f64, f64),
}

impl fmt::Debug for CustomMarginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomMarginal")
            .field("name", &self.name)
            .field("support", &self.support)
            .finish()
    }
}

/// The invariant law `Q` of the process.
#[derive(Debug, Clone)]
pub enum Marginal {
    Gig { density: GigDensity, sampler: GigSampler },
    /// Finitely supported law; `weights` sum to one.
    Discrete { values: Vec<f64>, weights: Vec<f64> },
    Custom(CustomMarginal),
}

impl Marginal {
    pub fn gig(params: GigParams) -> Result<Self, HarrisError> {
        Ok(Marginal::Gig {
            density: GigDensity::new(params)?,
            sampler: GigSampler::new(params)?,
        })
    }

    pub fn discrete_uniform(values: Vec<f64>) -> Result<Self, HarrisError> {
        let n = values.len();
        Self::discrete(values, vec![1.0 / n as f64; n])
    }

    pub fn discrete(values: Vec<f64>, weights: Vec<f64>) -> Result<Self, HarrisError> {
        if values.is_empty() || values.len() != weights.len() {
            return Err(HarrisError::InvalidParams("discrete law needs matching non-empty values and weights".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) || values.iter().any(|v| !v.is_finite()) {
            return Err(HarrisError::InvalidParams("discrete weights must be non-negative, values finite".into()));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(HarrisError::InvalidParams("discrete weights sum to zero".into()));
        }
        Ok(Marginal::Discrete {
            values,
            weights: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn gig_params(&self) -> Option<GigParams> {
        match self {
            Marginal::Gig { density, .. } => Some(density.params),
            _ => None,
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Marginal::Gig { sampler, .. } => sampler.sample(rng),
            Marginal::Discrete { values, weights } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (v, w) in values.iter().zip(weights) {
                    acc += w;
                    if u < acc {
                        return *v;
                    }
                }
                *values.last().expect("non-empty support")
            }
            Marginal::Custom(c) => (c.sampler)(rng),
        }
    }

    /// Probability mass at `x`; zero for continuous laws.
    pub fn atom(&self, x: f64) -> f64 {
        match self {
            Marginal::Discrete { values, weights } => values
                .iter()
                .zip(weights)
                .filter(|(v, _)| **v == x)
                .map(|(_, w)| w)
                .sum(),
            _ => 0.0,
        }
    }

    /// `Qf = ∫ f dQ`, exact for discrete laws and by quadrature otherwise.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64, HarrisError> {
        let v = match self {
            Marginal::Discrete { values, weights } => values.iter().zip(weights).map(|(v, w)| w * f(*v)).sum(),
            Marginal::Gig { density, .. } => {
                let d = *density;
                quad_integrate(|x| if x > 0.0 { f(x) * d.pdf(x) } else { 0.0 }, 0.0, f64::INFINITY, 1e-10)?.value
            }
            Marginal::Custom(c) => {
                let (lo, hi) = c.support;
                let g = |x: f64| f(x) * (c.pdf)(x);
                if lo.is_finite() {
                    quad_integrate(g, lo, hi, 1e-10)?.value
                } else {
                    let split = if hi.is_finite() { hi.min(0.0) } else { 0.0 };
                    let left = quad_integrate(|y| g(split - y), 0.0, f64::INFINITY, 1e-10)?.value;
                    let right = if hi > split {
                        quad_integrate(g, split, hi, 1e-10)?.value
                    } else {
                        0.0
                    };
                    left + right
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(HarrisError::NonFiniteExpectation)
        }
    }

    pub fn mean(&self) -> Result<f64, HarrisError> {
        match self {
            Marginal::Gig { density, .. } => Ok(crate::gig::gig_moments(&density.params)?.mean),
            _ => self.expect(|x| x),
        }
    }
}

/// Jump rate and invariant law of an SF-Harris process.
#[derive(Debug, Clone)]
pub struct SfHarrisParams {
    pub alpha: f64,
    /// Set for the `alpha = inf` limit, in which paths are constant.
    pub constant_paths: bool,
    pub marginal: Marginal,
}

impl SfHarrisParams {
    pub fn new(alpha: f64, marginal: Marginal) -> Result<Self, HarrisError> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(HarrisError::InvalidParams(format!("alpha must be positive and finite, got {alpha}")));
        }
        Ok(Self {
            alpha,
            constant_paths: false,
            marginal,
        })
    }

    /// The degenerate process whose paths never leave the starting value.
    pub fn constant(marginal: Marginal) -> Self {
        Self {
            alpha: f64::INFINITY,
            constant_paths: true,
            marginal,
        }
    }
}

/// A piecewise-constant path stored as its jump skeleton.
///
/// The path equals `start` on `[origin, T_1)` and `states[n]` on
/// `[T_{n+1}, T_{n+2})`, where `T` are the `jump_times`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub origin: f64,
    pub start: f64,
    pub jump_times: Vec<f64>,
    pub states: Vec<f64>,
    pub horizon: f64,
}

impl Trajectory {
    pub fn new(origin: f64, start: f64, jump_times: Vec<f64>, states: Vec<f64>, horizon: f64) -> Result<Self, HarrisError> {
        let t = Self {
            origin,
            start,
            jump_times,
            states,
            horizon,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), HarrisError> {
        if !(self.horizon >= self.origin) {
            return Err(HarrisError::InvalidTrajectory("horizon precedes origin".into()));
        }
        if self.jump_times.len() != self.states.len() {
            return Err(HarrisError::InvalidTrajectory("jump times and states differ in length".into()));
        }
        let mut prev = self.origin;
        for &t in &self.jump_times {
            if !(t > prev) || t > self.horizon {
                return Err(HarrisError::InvalidTrajectory(format!("jump time {t} out of order or beyond horizon")));
            }
            prev = t;
        }
        Ok(())
    }

    pub fn jump_count(&self) -> usize {
        self.jump_times.len()
    }

    /// Completed holding times `T_n - T_{n-1}` (the censored last sojourn excluded).
    pub fn holding_times(&self) -> Vec<f64> {
        let mut prev = self.origin;
        self.jump_times
            .iter()
            .map(|&t| {
                let s = t - prev;
                prev = t;
                s
            })
            .collect()
    }

    /// Value at the end of the horizon.
    pub fn last_value(&self) -> f64 {
        self.states.last().copied().unwrap_or(self.start)
    }

    fn check_time(&self, t: f64) -> Result<(), HarrisError> {
        if t < self.origin || t > self.horizon || t.is_nan() {
            return Err(HarrisError::TimeOutOfRange {
                t,
                origin: self.origin,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    /// Number of jumps in `(origin, t]`.
    fn jumps_before(&self, t: f64) -> usize {
        self.jump_times.partition_point(|&s| s <= t)
    }

    /// Right-continuous value at `t`.
    pub fn value_at(&self, t: f64) -> Result<f64, HarrisError> {
        self.check_time(t)?;
        let n = self.jumps_before(t);
        Ok(if n == 0 { self.start } else { self.states[n - 1] })
    }
}

/// Weights `(1 - e^{-alpha t}, e^{-alpha t})` of the fresh draw and of staying put.
pub fn transition_weights(alpha: f64, t: f64) -> Result<(f64, f64), HarrisError> {
    if !(t >= 0.0) {
        return Err(HarrisError::InvalidParams(format!("negative time {t}")));
    }
    if !(alpha > 0.0) {
        return Err(HarrisError::InvalidParams(format!("alpha must be positive, got {alpha}")));
    }
    let stay = (-alpha * t).exp();
    Ok((-(-alpha * t).exp_m1(), stay))
}

/// `T_t f(x) = (1 - e^{-alpha t}) Qf + e^{-alpha t} f(x)`.
pub fn semigroup_apply<F: Fn(f64) -> f64>(p: &SfHarrisParams, f: F, t: f64, x: f64) -> Result<f64, HarrisError> {
    if p.constant_paths {
        return Ok(f(x));
    }
    let (w_new, w_stay) = transition_weights(p.alpha, t)?;
    if w_new == 0.0 {
        return Ok(f(x));
    }
    let qf = p.marginal.expect(&f)?;
    Ok(w_new * qf + w_stay * f(x))
}

/// `sup_A |P_t(x, A) - Q(A)| = e^{-alpha t} (1 - Q({x}))`.
pub fn total_variation_to_marginal(p: &SfHarrisParams, x: f64, t: f64) -> Result<f64, HarrisError> {
    let (_, stay) = transition_weights(p.alpha, t)?;
    Ok(stay * (1.0 - p.marginal.atom(x)))
}

/// Simulates a stationary path on `[0, horizon]`.
///
/// With `epsilon > 0` the path is built by uniformization: a Poisson clock of
/// rate `alpha / (1 - epsilon)` drives a chain that keeps its value with
/// probability `epsilon` and redraws from `Q` otherwise. Only redraws are
/// recorded, so the visible jump law is the same for every `epsilon`.
pub fn simulate<R: Rng>(p: &SfHarrisParams, horizon: f64, rng: &mut R, epsilon: f64) -> Result<Trajectory, HarrisError> {
    let start = p.marginal.sample(rng);
    simulate_from(p, 0.0, start, horizon, rng, epsilon)
}

/// Simulates forward from `start` at time `origin` until `horizon`.
pub fn simulate_from<R: Rng>(
    p: &SfHarrisParams,
    origin: f64,
    start: f64,
    horizon: f64,
    rng: &mut R,
    epsilon: f64,
) -> Result<Trajectory, HarrisError> {
    if !(horizon >= origin) || !horizon.is_finite() {
        return Err(HarrisError::InvalidParams(format!("horizon {horizon} must be finite and not before {origin}")));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(HarrisError::InvalidParams(format!("uniformization epsilon must lie in [0, 1), got {epsilon}")));
    }
    let mut traj = Trajectory {
        origin,
        start,
        jump_times: Vec::new(),
        states: Vec::new(),
        horizon,
    };
    if p.constant_paths {
        return Ok(traj);
    }
    let clock = Exp::new(p.alpha / (1.0 - epsilon)).map_err(|e| HarrisError::InvalidParams(e.to_string()))?;
    let mut t = origin;
    loop {
        t += clock.sample(rng);
        if t > horizon {
            break;
        }
        if epsilon > 0.0 && rng.random::<f64>() < epsilon {
            continue;
        }
        traj.jump_times.push(t);
        traj.states.push(p.marginal.sample(rng));
    }
    Ok(traj)
}

/// Evaluates the path at sorted `times`.
pub fn sample_at_times(traj: &Trajectory, times: &[f64]) -> Result<Vec<f64>, HarrisError> {
    let mut out = Vec::with_capacity(times.len());
    let mut n = 0;
    let mut prev = f64::NEG_INFINITY;
    for &t in times {
        traj.check_time(t)?;
        if t < prev {
            return Err(HarrisError::InvalidParams("query times must be sorted".into()));
        }
        prev = t;
        while n < traj.jump_times.len() && traj.jump_times[n] <= t {
            n += 1;
        }
        out.push(if n == 0 { traj.start } else { traj.states[n - 1] });
    }
    Ok(out)
}

/// `H*_t = ∫_origin^t H_s ds`.
pub fn integrate(traj: &Trajectory, t: f64) -> Result<f64, HarrisError> {
    traj.check_time(t)?;
    let n = traj.jumps_before(t);
    let mut acc = 0.0;
    let mut prev_t = traj.origin;
    let mut prev_y = traj.start;
    for k in 0..n {
        acc += prev_y * (traj.jump_times[k] - prev_t);
        prev_t = traj.jump_times[k];
        prev_y = traj.states[k];
    }
    Ok(acc + prev_y * (t - prev_t))
}

/// `H*` at each of the sorted `times`, in one sweep.
pub fn integrate_at_times(traj: &Trajectory, times: &[f64]) -> Result<Vec<f64>, HarrisError> {
    let mut out = Vec::with_capacity(times.len());
    let mut k = 0;
    let mut acc = 0.0;
    let mut prev_t = traj.origin;
    let mut prev_y = traj.start;
    let mut last = f64::NEG_INFINITY;
    for &t in times {
        traj.check_time(t)?;
        if t < last {
            return Err(HarrisError::InvalidParams("query times must be sorted".into()));
        }
        last = t;
        while k < traj.jump_times.len() && traj.jump_times[k] <= t {
            acc += prev_y * (traj.jump_times[k] - prev_t);
            prev_t = traj.jump_times[k];
            prev_y = traj.states[k];
            k += 1;
        }
        out.push(acc + prev_y * (t - prev_t));
    }
    Ok(out)
}

/// Law of the holding times of a semi-Markov path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum HoldingLaw {
    Exponential { rate: f64 },
    /// Pareto type II: `G(h) = 1 - (1 + h/scale)^{-shape}`.
    Lomax { shape: f64, scale: f64 },
    /// Classical Pareto on `[scale, inf)`: `G(h) = 1 - (scale/h)^shape`.
    Pareto { shape: f64, scale: f64 },
    Gamma { shape: f64, rate: f64 },
}

impl HoldingLaw {
    fn validate(&self) -> Result<(), HarrisError> {
        let ok = match *self {
            HoldingLaw::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            HoldingLaw::Lomax { shape, scale } | HoldingLaw::Pareto { shape, scale } => {
                shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()
            }
            HoldingLaw::Gamma { shape, rate } => shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(HarrisError::InvalidParams(format!("invalid holding law {self:?}")))
        }
    }

    pub fn cdf(&self, h: f64) -> f64 {
        if h <= 0.0 {
            return 0.0;
        }
        match *self {
            HoldingLaw::Exponential { rate } => -(-rate * h).exp_m1(),
            HoldingLaw::Lomax { shape, scale } => 1.0 - (1.0 + h / scale).powf(-shape),
            HoldingLaw::Pareto { shape, scale } => {
                if h < scale {
                    0.0
                } else {
                    1.0 - (scale / h).powf(shape)
                }
            }
            HoldingLaw::Gamma { shape, rate } => gamma_cdf(shape, rate * h),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            HoldingLaw::Exponential { rate } => Exp::new(rate).expect("validated").sample(rng),
            HoldingLaw::Lomax { shape, scale } => {
                let u: f64 = rng.random();
                scale * ((1.0 - u).powf(-1.0 / shape) - 1.0)
            }
            HoldingLaw::Pareto { shape, scale } => {
                let u: f64 = rng.random();
                scale * (1.0 - u).powf(-1.0 / shape)
            }
            HoldingLaw::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate).expect("validated").sample(rng),
        }
    }
}

fn gamma_cdf(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        statrs::function::gamma::gamma_lr(a, x)
    }
}

#[derive(Debug, Clone)]
pub struct SemiMarkovSpec {
    pub holding_law: HoldingLaw,
    pub marginal: Marginal,
}

/// Law `F` of the per-sojourn jump rates of a mixture process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum RateLaw {
    Degenerate { rate: f64 },
    Discrete { rates: Vec<f64>, weights: Vec<f64> },
    Gamma { shape: f64, rate: f64 },
}

impl RateLaw {
    fn validate(&self) -> Result<(), HarrisError> {
        let ok = match self {
            RateLaw::Degenerate { rate } => *rate > 0.0 && rate.is_finite(),
            RateLaw::Discrete { rates, weights } => {
                !rates.is_empty()
                    && rates.len() == weights.len()
                    && rates.iter().all(|r| *r > 0.0 && r.is_finite())
                    && weights.iter().all(|w| *w >= 0.0)
                    && (weights.iter().sum::<f64>() - 1.0).abs() < 1e-9
            }
            RateLaw::Gamma { shape, rate } => *shape > 0.0 && *rate > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(HarrisError::InvalidParams(format!("invalid rate law {self:?}")))
        }
    }

    /// Laplace transform `E[e^{-rho h}]`.
    pub fn laplace(&self, h: f64) -> f64 {
        match self {
            RateLaw::Degenerate { rate } => (-rate * h).exp(),
            RateLaw::Discrete { rates, weights } => rates.iter().zip(weights).map(|(r, w)| w * (-r * h).exp()).sum(),
            RateLaw::Gamma { shape, rate } => (rate / (rate + h)).powf(*shape),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            RateLaw::Degenerate { rate } => *rate,
            RateLaw::Discrete { rates, weights } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (r, w) in rates.iter().zip(weights) {
                    acc += w;
                    if u < acc {
                        return *r;
                    }
                }
                *rates.last().expect("non-empty")
            }
            RateLaw::Gamma { shape, rate } => Gamma::new(*shape, 1.0 / rate).expect("validated").sample(rng),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MixtureSpec {
    pub rate_law: RateLaw,
    pub marginal: Marginal,
    /// Hurst-type exponent when built by [`MixtureSpec::long_memory`].
    pub hurst: Option<f64>,
}

impl MixtureSpec {
    pub fn new(rate_law: RateLaw, marginal: Marginal) -> Result<Self, HarrisError> {
        rate_law.validate()?;
        Ok(Self {
            rate_law,
            marginal,
            hurst: None,
        })
    }

    /// Rates drawn from `Ga(2(1 - H), 1)`, giving `r(h) = (1 + h)^{-2(1 - H)}`.
    pub fn long_memory(hurst: f64, marginal: Marginal) -> Result<Self, HarrisError> {
        if !(hurst > 0.5 && hurst < 1.0) {
            return Err(HarrisError::InvalidParams(format!("H must lie in (1/2, 1), got {hurst}")));
        }
        Ok(Self {
            rate_law: RateLaw::Gamma {
                shape: 2.0 * (1.0 - hurst),
                rate: 1.0,
            },
            marginal,
            hurst: Some(hurst),
        })
    }
}

/// Result of a simulation whose holding-time draws may be rejected.
#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub trajectory: Trajectory,
    /// Non-positive holding time or rate draws that were discarded.
    pub rejected_draws: usize,
}

fn renewal_path<R: Rng, H: FnMut(&mut R) -> f64>(
    marginal: &Marginal,
    horizon: f64,
    rng: &mut R,
    mut holding: H,
) -> Result<SimOutcome, HarrisError> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(HarrisError::InvalidParams(format!("horizon must be positive, got {horizon}")));
    }
    let start = marginal.sample(rng);
    let mut traj = Trajectory {
        origin: 0.0,
        start,
        jump_times: Vec::new(),
        states: Vec::new(),
        horizon,
    };
    let mut rejected = 0;
    let mut t = 0.0;
    loop {
        let v = loop {
            let v = holding(rng);
            if v > 0.0 && v.is_finite() {
                break v;
            }
            rejected += 1;
        };
        t += v;
        if t > horizon {
            break;
        }
        traj.jump_times.push(t);
        traj.states.push(marginal.sample(rng));
    }
    Ok(SimOutcome {
        trajectory: traj,
        rejected_draws: rejected,
    })
}

/// Semi-Markov path: i.i.d. holding times from `G`, i.i.d. states from `Q`,
/// with a renewal at time zero.
pub fn simulate_semi_markov<R: Rng>(spec: &SemiMarkovSpec, horizon: f64, rng: &mut R) -> Result<SimOutcome, HarrisError> {
    spec.holding_law.validate()?;
    let law = spec.holding_law;
    renewal_path(&spec.marginal, horizon, rng, |r| law.sample(r))
}

/// Mixture path: each holding time is `Exp(rho_n)` with a fresh `rho_n ~ F`.
pub fn simulate_mixture<R: Rng>(spec: &MixtureSpec, horizon: f64, rng: &mut R) -> Result<SimOutcome, HarrisError> {
    spec.rate_law.validate()?;
    let law = spec.rate_law.clone();
    let mut rejected_rates = 0;
    let out = renewal_path(&spec.marginal, horizon, rng, |r| {
        let rho = loop {
            let rho = law.sample(r);
            if rho > 0.0 && rho.is_finite() {
                break rho;
            }
            rejected_rates += 1;
        };
        let e: f64 = Exp1.sample(r);
        e / rho
    })?;
    Ok(SimOutcome {
        rejected_draws: out.rejected_draws + rejected_rates,
        trajectory: out.trajectory,
    })
}

/// Lag-`h` autocorrelation between the value at a renewal epoch and `h` later.
pub trait Autocorrelation {
    fn autocorrelation(&self, h: f64) -> Result<f64, HarrisError>;
}

fn check_lag(h: f64) -> Result<(), HarrisError> {
    if !(h >= 0.0) {
        return Err(HarrisError::InvalidParams(format!("negative lag {h}")));
    }
    Ok(())
}

impl Autocorrelation for SfHarrisParams {
    fn autocorrelation(&self, h: f64) -> Result<f64, HarrisError> {
        check_lag(h)?;
        if self.constant_paths {
            return Ok(1.0);
        }
        Ok((-self.alpha * h).exp())
    }
}

impl Autocorrelation for SemiMarkovSpec {
    fn autocorrelation(&self, h: f64) -> Result<f64, HarrisError> {
        check_lag(h)?;
        self.holding_law.validate()?;
        Ok(1.0 - self.holding_law.cdf(h))
    }
}

impl Autocorrelation for MixtureSpec {
    fn autocorrelation(&self, h: f64) -> Result<f64, HarrisError> {
        check_lag(h)?;
        self.rate_law.validate()?;
        Ok(self.rate_law.laplace(h))
    }
}

pub fn autocorrelation<M: Autocorrelation + ?Sized>(model: &M, h: f64) -> Result<f64, HarrisError> {
    model.autocorrelation(h)
}
