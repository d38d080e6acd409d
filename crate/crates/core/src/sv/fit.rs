use rand::Rng;
use serde::{Deserialize, Serialize};

use super::bars::{MinuteBar, Session};
use super::clean::{clean_bars, CleanAudit};
use super::jumps::{detect_jumps, JumpConfig, JumpReport};
use super::mubeta::{posterior_mu_beta, MuBetaPosterior, MuBetaPriors};
use super::periodicity::{deseasonalize, estimate_periodicity, PeriodicityFunction};
use super::returns::{compute_returns, windows, ReturnSeries, TimeAxis};
use super::spot::{integrated_vol, spot_vol_filter, SpotFilter, VolSeries};
use super::{SvError, SvParams};
use crate::inference::{gibbs_b, posterior_mode, GibbsConfig, MarginalFamily, ObservationSeries, PosteriorChains, Priors};

/// Volatility increments used in the drift and risk-premium update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuBetaVolatility {
    /// The filtered spot path times the periodicity factor.
    Filtered,
    /// Raw realized variance per window.
    Realized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvConfig {
    pub session: Session,
    pub time_unit_days: f64,
    pub sampling_minutes: u32,
    pub window_minutes: u32,
    pub clean: bool,
    pub jumps: Option<JumpConfig>,
    pub spot_filter: SpotFilter,
    /// Days per periodicity cycle; `None` skips the adjustment.
    pub periodicity_cycle: Option<usize>,
    pub mu_beta_volatility: MuBetaVolatility,
    pub priors: Priors,
    pub mu_beta_priors: MuBetaPriors,
    pub gibbs: GibbsConfig,
}

impl Default for SvConfig {
    fn default() -> Self {
        Self {
            session: Session::default(),
            time_unit_days: 1.0,
            sampling_minutes: 1,
            window_minutes: 15,
            clean: true,
            jumps: Some(JumpConfig::default()),
            spot_filter: SpotFilter::default(),
            periodicity_cycle: Some(5),
            mu_beta_volatility: MuBetaVolatility::Filtered,
            priors: Priors::default(),
            mu_beta_priors: MuBetaPriors::default(),
            gibbs: GibbsConfig::default(),
        }
    }
}

impl SvConfig {
    pub fn cycle_length(&self) -> usize {
        self.periodicity_cycle.unwrap_or(5)
    }
}

/// Everything the pipeline produced, stage by stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvFit {
    pub config: SvConfig,
    pub axis: TimeAxis,
    pub params: SvParams,
    pub clean_audit: CleanAudit,
    pub returns: ReturnSeries,
    pub jumps: Option<JumpReport>,
    /// Realized variance per window after jump removal.
    pub raw_vol: VolSeries,
    pub periodicity: Option<PeriodicityFunction>,
    /// Periodically adjusted and filtered spot series.
    pub adjusted: VolSeries,
    pub observations: ObservationSeries,
    pub chains: PosteriorChains,
    pub mu_beta: MuBetaPosterior,
}

impl SvFit {
    pub fn factor(&self, cycle_day: usize, position: usize) -> f64 {
        self.periodicity.as_ref().map_or(1.0, |f| f.factor(cycle_day, position))
    }
}

fn stage<E: std::fmt::Display>(name: &'static str) -> impl Fn(E) -> SvError {
    move |e| SvError::Stage { stage: name, message: e.to_string() }
}

/// Runs cleaning, returns, jump removal, realized variance, periodicity,
/// spot filtering, Gibbs-b on the adjusted spot series and the drift and
/// risk-premium update.
pub fn fit_sv<R: Rng>(bars: &[MinuteBar], cfg: &SvConfig, rng: &mut R) -> Result<SvFit, SvError> {
    let Some(first) = bars.first() else {
        return Err(SvError::InvalidBars("no bars".into()));
    };
    if bars.windows(2).any(|w| w[1].timestamp < w[0].timestamp) {
        return Err(SvError::InvalidBars("bars are not sorted by timestamp".into()));
    }
    let (cleaned, clean_audit) = if cfg.clean {
        let c = clean_bars(bars, &cfg.session);
        (c.bars, c.audit)
    } else {
        (bars.to_vec(), CleanAudit::default())
    };
    if cleaned.is_empty() {
        return Err(SvError::Stage { stage: "clean", message: "no bars survive cleaning".into() });
    }
    let axis = TimeAxis::new(first.date(), cfg.session, cfg.time_unit_days)?;
    let all_returns = compute_returns(&cleaned, &axis, cfg.sampling_minutes, cfg.cycle_length()).map_err(stage("returns"))?;
    let jumps = match &cfg.jumps {
        Some(j) => Some(detect_jumps(&all_returns, j).map_err(stage("jumps"))?),
        None => None,
    };
    let returns = match &jumps {
        Some(j) => all_returns.without(&j.indices()),
        None => all_returns,
    };
    let ws = windows(&returns, cfg.window_minutes).map_err(stage("windows"))?;
    let raw_vol = integrated_vol(&returns, &ws).map_err(stage("realized variance"))?;
    let periodicity = match cfg.periodicity_cycle {
        Some(l) => Some(estimate_periodicity(&raw_vol, l).map_err(stage("periodicity"))?),
        None => None,
    };
    let unfiltered = match &periodicity {
        Some(f) => deseasonalize(&raw_vol, f),
        None => raw_vol.clone(),
    };
    let adjusted = spot_vol_filter(&unfiltered, &cfg.spot_filter).map_err(stage("spot filter"))?;
    let observations = ObservationSeries::new(adjusted.times.clone(), adjusted.spot.clone()).map_err(stage("observations"))?;
    let chains = gibbs_b(&observations, &cfg.priors, &MarginalFamily::Gig, &cfg.gibbs, rng).map_err(stage("gibbs"))?;
    let est = posterior_mode(&chains).map_err(stage("posterior mode"))?;
    let gig = est.gig.ok_or_else(|| SvError::Stage { stage: "posterior mode", message: "no GIG estimate".into() })?;

    let sums: Vec<f64> = ws.iter().map(|w| returns.returns[w.range.clone()].iter().sum()).collect();
    let steps: Vec<f64> = ws.iter().map(|w| w.duration()).collect();
    let h_star: Vec<f64> = match cfg.mu_beta_volatility {
        MuBetaVolatility::Filtered => (0..ws.len())
            .map(|i| {
                let f = periodicity.as_ref().map_or(1.0, |f| f.factor(ws[i].cycle_day, ws[i].position));
                adjusted.spot[i] * f * steps[i]
            })
            .collect(),
        MuBetaVolatility::Realized => raw_vol.increments(),
    };
    let mu_beta = posterior_mu_beta(&steps, &sums, &h_star, &cfg.mu_beta_priors).map_err(stage("mu/beta"))?;
    Ok(SvFit {
        config: cfg.clone(),
        axis,
        params: SvParams { mu: mu_beta.mu_mean, beta: mu_beta.beta_mean, alpha: est.alpha, gig },
        clean_audit,
        returns,
        jumps,
        raw_vol,
        periodicity,
        adjusted,
        observations,
        chains,
        mu_beta,
    })
}
