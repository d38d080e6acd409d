use serde::{Deserialize, Serialize};
use sfharris::gig::GigParams;
use sfharris::harris::{
    sample_at_times, simulate, simulate_mixture, simulate_semi_markov, HoldingLaw, Marginal, MixtureSpec, RateLaw,
    SemiMarkovSpec, SfHarrisParams, Trajectory,
};
use sfharris::inference::ObservationSeries;
use sfharris::io::{write_observations, write_skeletons};

use super::{check, default_gig, in_run_dir, rng, Family};
use crate::cli::{HoldingKind, MarginalFlags, ModelKind, SimulateArgs};
use crate::error::CliError;
use crate::manifest::load_config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    #[default]
    Harris,
    SemiMarkov,
    Mixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarginalConfig {
    pub family: Family,
    pub gig: GigParams,
    pub support: Vec<f64>,
}

impl Default for MarginalConfig {
    fn default() -> Self {
        Self { family: Family::Gig, gig: default_gig(), support: vec![1.0, 2.0, 3.0, 4.0, 5.0] }
    }
}

impl MarginalConfig {
    pub fn apply(&mut self, f: &MarginalFlags) {
        if let Some(k) = f.marginal {
            self.family = k.into();
        }
        if let Some(v) = f.lambda {
            self.gig.lambda = v;
        }
        if let Some(v) = f.kappa {
            self.gig.kappa = v;
        }
        if let Some(v) = f.eta {
            self.gig.eta = v;
        }
        if let Some(s) = &f.support {
            self.support = s.clone();
        }
    }

    pub fn build(&self) -> Result<Marginal, CliError> {
        Ok(match self.family {
            Family::Gig => Marginal::gig(self.gig)?,
            Family::Uniform => Marginal::discrete_uniform(self.support.clone())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulateConfig {
    pub model: Model,
    pub marginal: MarginalConfig,
    pub alpha: f64,
    pub horizon: f64,
    pub paths: usize,
    pub epsilon: f64,
    pub holding: HoldingLaw,
    /// Explicit rate law of the mixture model; `hurst` is used when absent.
    pub rate_law: Option<RateLaw>,
    pub hurst: f64,
    pub grid_step: Option<f64>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            model: Model::Harris,
            marginal: MarginalConfig::default(),
            alpha: 3.0,
            horizon: 40.0,
            paths: 1,
            epsilon: 0.0,
            holding: HoldingLaw::Lomax { shape: 1.5, scale: 1.0 },
            rate_law: None,
            hurst: 0.8,
            grid_step: None,
        }
    }
}

/// Combines the holding-law flags with the configured law.
fn holding_law(current: HoldingLaw, a: &SimulateArgs) -> HoldingLaw {
    let (kind, shape, scale, rate) = match current {
        HoldingLaw::Exponential { rate } => (HoldingKind::Exponential, 1.5, 1.0, rate),
        HoldingLaw::Lomax { shape, scale } => (HoldingKind::Lomax, shape, scale, 1.0),
        HoldingLaw::Pareto { shape, scale } => (HoldingKind::Pareto, shape, scale, 1.0),
        HoldingLaw::Gamma { shape, rate } => (HoldingKind::Gamma, shape, 1.0, rate),
    };
    let kind = a.holding.unwrap_or(kind);
    let shape = a.shape.unwrap_or(shape);
    let scale = a.scale.unwrap_or(scale);
    let rate = a.rate.unwrap_or(rate);
    match kind {
        HoldingKind::Exponential => HoldingLaw::Exponential { rate },
        HoldingKind::Lomax => HoldingLaw::Lomax { shape, scale },
        HoldingKind::Pareto => HoldingLaw::Pareto { shape, scale },
        HoldingKind::Gamma => HoldingLaw::Gamma { shape, rate },
    }
}

pub fn run(a: SimulateArgs) -> Result<(), CliError> {
    let (mut cfg, replay_seed) = load_config::<SimulateConfig>(a.common.config.as_deref())?;
    if let Some(m) = a.model {
        cfg.model = match m {
            ModelKind::Harris => Model::Harris,
            ModelKind::SemiMarkov => Model::SemiMarkov,
            ModelKind::Mixture => Model::Mixture,
        };
    }
    cfg.marginal.apply(&a.marginal);
    cfg.alpha = a.alpha.unwrap_or(cfg.alpha);
    cfg.horizon = a.horizon.unwrap_or(cfg.horizon);
    cfg.paths = a.paths.unwrap_or(cfg.paths);
    cfg.epsilon = a.epsilon.unwrap_or(cfg.epsilon);
    cfg.holding = holding_law(cfg.holding, &a);
    cfg.hurst = a.hurst.unwrap_or(cfg.hurst);
    if a.grid_step.is_some() {
        cfg.grid_step = a.grid_step;
    }
    check(cfg.horizon > 0.0 && cfg.horizon.is_finite(), || format!("horizon must be positive, got {}", cfg.horizon))?;
    check(cfg.paths > 0, || "paths must be at least 1".into())?;
    if let Some(s) = cfg.grid_step {
        check(s > 0.0 && s <= cfg.horizon, || format!("grid step must lie in (0, horizon], got {s}"))?;
    }
    let seed = a.common.seed.or(replay_seed).unwrap_or(0);

    let marginal = cfg.marginal.build()?;
    in_run_dir(&a.common, "simulate", seed, &cfg, |dir| {
        let mut r = rng(seed);
        let mut paths: Vec<Trajectory> = Vec::with_capacity(cfg.paths);
        let mut rejected = 0;
        match cfg.model {
            Model::Harris => {
                let p = SfHarrisParams::new(cfg.alpha, marginal)?;
                for _ in 0..cfg.paths {
                    paths.push(simulate(&p, cfg.horizon, &mut r, cfg.epsilon)?);
                }
            }
            Model::SemiMarkov => {
                let spec = SemiMarkovSpec { holding_law: cfg.holding, marginal };
                for _ in 0..cfg.paths {
                    let o = simulate_semi_markov(&spec, cfg.horizon, &mut r)?;
                    rejected += o.rejected_draws;
                    paths.push(o.trajectory);
                }
            }
            Model::Mixture => {
                let spec = match &cfg.rate_law {
                    Some(law) => MixtureSpec::new(law.clone(), marginal)?,
                    None => MixtureSpec::long_memory(cfg.hurst, marginal)?,
                };
                for _ in 0..cfg.paths {
                    let o = simulate_mixture(&spec, cfg.horizon, &mut r)?;
                    rejected += o.rejected_draws;
                    paths.push(o.trajectory);
                }
            }
        }
        write_skeletons(&dir.path("skeleton.csv"), &paths)?;
        dir.output("skeleton.csv")?;
        if let Some(step) = cfg.grid_step {
            let n = (cfg.horizon / step + 1e-9).floor() as usize;
            let times: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
            let values = sample_at_times(&paths[0], &times)?;
            let obs = ObservationSeries::new(times, values)?;
            write_observations(&dir.path("observations.csv"), &obs)?;
            dir.output("observations.csv")?;
        }
        let jumps: usize = paths.iter().map(|p| p.jump_count()).sum();
        dir.set_audit(serde_json::json!({ "jumps": jumps, "rejected_draws": rejected }));
        Ok(())
    })
}
