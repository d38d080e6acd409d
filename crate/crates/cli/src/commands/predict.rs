use std::fmt::Write;

use serde::{Deserialize, Serialize};
use sfharris::inference::{first_jump_summary, pointwise_hpd, predict_trajectories, GibbsVariant};
use sfharris::io::{read_chains, read_observations, write_skeletons};

use super::{check, in_run_dir, inference_family, rng, Family};
use crate::cli::{PredictArgs, VariantArg};
use crate::error::CliError;
use crate::manifest::load_config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    A,
    #[default]
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictConfig {
    pub family: Family,
    pub support: Option<Vec<f64>>,
    pub variant: Variant,
    pub ahead: f64,
    pub paths: usize,
    pub grid_points: usize,
    pub prob: f64,
    /// Delays for first-jump probabilities; a quarter, half and all of `ahead` when empty.
    pub within: Vec<f64>,
}

impl Default for PredictConfig {
    fn default() -> Self {
        Self {
            family: Family::Gig,
            support: None,
            variant: Variant::B,
            ahead: 10.0,
            paths: 1000,
            grid_points: 101,
            prob: 0.9,
            within: Vec::new(),
        }
    }
}

pub fn run(a: PredictArgs) -> Result<(), CliError> {
    let (mut cfg, replay_seed) = load_config::<PredictConfig>(a.common.config.as_deref())?;
    if let Some(f) = a.family {
        cfg.family = f.into();
    }
    if a.support.is_some() {
        cfg.support = a.support.clone();
    }
    if let Some(v) = a.variant {
        cfg.variant = match v {
            VariantArg::A => Variant::A,
            VariantArg::B => Variant::B,
        };
    }
    cfg.ahead = a.ahead.unwrap_or(cfg.ahead);
    cfg.paths = a.paths.unwrap_or(cfg.paths);
    cfg.grid_points = a.grid_points.unwrap_or(cfg.grid_points);
    cfg.prob = a.prob.unwrap_or(cfg.prob);
    if let Some(w) = &a.within {
        cfg.within = w.clone();
    }
    if cfg.within.is_empty() {
        cfg.within = vec![cfg.ahead / 4.0, cfg.ahead / 2.0, cfg.ahead];
    }
    check(cfg.ahead > 0.0 && cfg.ahead.is_finite(), || format!("ahead must be positive, got {}", cfg.ahead))?;
    check(cfg.grid_points >= 2, || "the HPD grid needs at least 2 points".into())?;
    check(cfg.prob > 0.0 && cfg.prob < 1.0, || format!("HPD mass must lie in (0, 1), got {}", cfg.prob))?;
    let seed = a.common.seed.or(replay_seed).unwrap_or(0);
    let obs = read_observations(&a.input)?;
    let variant = match cfg.variant {
        Variant::A => GibbsVariant::A,
        Variant::B => GibbsVariant::B,
    };
    let chains = read_chains(&a.chains, variant, 0, 1)?;
    let family = inference_family(cfg.family, &cfg.support);

    in_run_dir(&a.common, "predict", seed, &cfg, |dir| {
        dir.input(&a.input)?;
        dir.input(&a.chains)?;
        let (tn, _) = obs.last();
        let horizon = tn + cfg.ahead;
        let mut r = rng(seed);
        let paths = predict_trajectories(&obs, &chains, &family, horizon, cfg.paths, &mut r)?;
        write_skeletons(&dir.path("paths.csv"), &paths)?;
        dir.output("paths.csv")?;

        let grid: Vec<f64> =
            (0..cfg.grid_points).map(|i| tn + cfg.ahead * i as f64 / (cfg.grid_points - 1) as f64).collect();
        let bands = pointwise_hpd(&paths, &grid, cfg.prob)?;
        let mut csv = String::from("time,lo,hi,median\n");
        for b in &bands {
            let _ = writeln!(csv, "{},{},{},{}", b.time, b.lo, b.hi, b.median);
        }
        dir.write_text("hpd.csv", &csv)?;

        let summary = first_jump_summary(&paths, &chains, &cfg.within);
        println!(
            "first jump: mean delay {:.4} over paths that jump ({} censored), posterior E[1/alpha] {:.4}",
            summary.mean_observed, summary.censored, summary.mean_from_alpha
        );
        dir.write_json("first_jump.json", &summary)?;
        Ok(())
    })
}
