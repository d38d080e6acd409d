use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sfharris::io::{read_bars, write_bars, write_chains, write_observations};
use sfharris::sv::{
    fit_sv, forecast_coverage, generate_bars, holdout_returns, split_by_days, u_shape, CoverageTarget, MuBetaVolatility,
    SpotFilter, SvConfig, SvFit, SyntheticConfig, VolSeries, TABLE_PROBS,
};

use super::estimate::{apply_gibbs, check_gibbs};
use super::{check, in_run_dir, rng};
use crate::cli::{FilterKind, SvFitArgs, SvForecastArgs, SvSynthArgs, TargetArg, VolArg};
use crate::error::CliError;
use crate::manifest::{load_config, RunDir};

pub const FIT_FILE: &str = "fit.json";
pub const HOLDOUT_FILE: &str = "holdout_bars.csv";

pub fn synth(a: SvSynthArgs) -> Result<(), CliError> {
    let (mut cfg, replay_seed) = load_config::<SyntheticConfig>(a.common.config.as_deref())?;
    cfg.days = a.days.unwrap_or(cfg.days);
    let p = &mut cfg.params;
    p.mu = a.mu.unwrap_or(p.mu);
    p.beta = a.beta.unwrap_or(p.beta);
    p.alpha = a.alpha.unwrap_or(p.alpha);
    p.gig.lambda = a.lambda.unwrap_or(p.gig.lambda);
    p.gig.kappa = a.kappa.unwrap_or(p.gig.kappa);
    p.gig.eta = a.eta.unwrap_or(p.gig.eta);
    cfg.time_unit_days = a.time_unit_days.unwrap_or(cfg.time_unit_days);
    cfg.jumps = a.jumps.unwrap_or(cfg.jumps);
    if let Some(amp) = a.u_shape {
        cfg.intraday = Some(u_shape(cfg.session.minutes(), amp));
    }
    let seed = a.common.seed.or(replay_seed).unwrap_or(0);
    in_run_dir(&a.common, "sv-synth", seed, &cfg, |dir| {
        let data = generate_bars(&cfg, &mut rng(seed))?;
        write_bars(&dir.path("bars.csv"), &data.bars)?;
        dir.output("bars.csv")?;
        dir.write_json(
            "truth.json",
            &serde_json::json!({
                "params": cfg.params,
                "jump_returns": data.jump_returns,
                "jump_sizes": data.jump_sizes,
            }),
        )?;
        Ok(())
    })
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SvFitConfig {
    #[serde(flatten)]
    pub sv: SvConfig,
    /// Leading fraction of days used for the fit; the rest is written as holdout.
    pub split: Option<f64>,
}

fn write_vol(dir: &mut RunDir, name: &str, vs: &VolSeries) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(dir.path(name))?;
    w.write_record(["time", "duration", "integrated", "spot", "count", "day", "cycle_day", "position"])?;
    for i in 0..vs.len() {
        w.write_record([
            vs.times[i].to_string(),
            vs.durations[i].to_string(),
            vs.integrated[i].to_string(),
            vs.spot[i].to_string(),
            vs.counts[i].to_string(),
            vs.day[i].to_string(),
            vs.cycle_day[i].to_string(),
            vs.position[i].to_string(),
        ])?;
    }
    w.flush()?;
    dir.output(name)?;
    Ok(())
}

fn write_stages(dir: &mut RunDir, fit: &SvFit) -> Result<(), CliError> {
    let rs = &fit.returns;
    let mut w = csv::Writer::from_path(dir.path("returns.csv"))?;
    w.write_record(["start", "end", "return", "day", "cycle_day", "slot"])?;
    for i in 0..rs.len() {
        w.write_record([
            rs.start[i].to_string(),
            rs.end[i].to_string(),
            rs.returns[i].to_string(),
            rs.day[i].to_string(),
            rs.cycle_day[i].to_string(),
            rs.slot[i].to_string(),
        ])?;
    }
    w.flush()?;
    dir.output("returns.csv")?;

    if let Some(j) = &fit.jumps {
        let mut w = csv::Writer::from_path(dir.path("jumps.csv"))?;
        w.write_record(["pass", "return_index"])?;
        for (k, pass) in j.passes.iter().enumerate() {
            for i in &pass.marked {
                w.write_record([k.to_string(), i.to_string()])?;
            }
        }
        w.flush()?;
        dir.output("jumps.csv")?;
    }

    write_vol(dir, "realized.csv", &fit.raw_vol)?;
    write_vol(dir, "adjusted.csv", &fit.adjusted)?;

    if let Some(f) = &fit.periodicity {
        let mut w = csv::Writer::from_path(dir.path("periodicity.csv"))?;
        w.write_record(["cycle_day", "position", "factor", "interpolated"])?;
        for (d, row) in f.factors.iter().enumerate() {
            for (p, v) in row.iter().enumerate() {
                let interp = f.interpolated.contains(&(d, p));
                w.write_record([d.to_string(), p.to_string(), v.to_string(), interp.to_string()])?;
            }
        }
        w.flush()?;
        dir.output("periodicity.csv")?;
    }

    write_observations(&dir.path("observations.csv"), &fit.observations)?;
    dir.output("observations.csv")?;
    write_chains(&dir.path("chains.csv"), &fit.chains)?;
    dir.output("chains.csv")?;
    Ok(())
}

pub fn fit(a: SvFitArgs) -> Result<(), CliError> {
    let (mut cfg, replay_seed) = load_config::<SvFitConfig>(a.common.config.as_deref())?;
    let sv = &mut cfg.sv;
    sv.time_unit_days = a.time_unit_days.unwrap_or(sv.time_unit_days);
    if let Some(f) = a.filter {
        sv.spot_filter = match f {
            FilterKind::Collapse => SpotFilter::Collapse { eps: a.eps.unwrap_or(1e-5) },
            FilterKind::ChangePoint => SpotFilter::ChangePoint { penalty_scale: a.penalty.unwrap_or(1.0) },
            FilterKind::None => SpotFilter::None,
        };
    } else {
        match &mut sv.spot_filter {
            SpotFilter::Collapse { eps } => *eps = a.eps.unwrap_or(*eps),
            SpotFilter::ChangePoint { penalty_scale } => *penalty_scale = a.penalty.unwrap_or(*penalty_scale),
            SpotFilter::None => {}
        }
    }
    if a.no_jumps {
        sv.jumps = None;
    }
    if a.no_periodicity {
        sv.periodicity_cycle = None;
    }
    if let Some(v) = a.volatility {
        sv.mu_beta_volatility = match v {
            VolArg::Filtered => MuBetaVolatility::Filtered,
            VolArg::Realized => MuBetaVolatility::Realized,
        };
    }
    apply_gibbs(&mut sv.gibbs, &a.gibbs);
    check_gibbs(&sv.gibbs)?;
    if a.split.is_some() {
        cfg.split = a.split;
    }
    if let Some(s) = cfg.split {
        check(s > 0.0 && s < 1.0, || format!("split must lie in (0, 1), got {s}"))?;
    }
    let seed = a.common.seed.or(replay_seed).unwrap_or(0);
    let bars = read_bars(&a.bars)?;

    in_run_dir(&a.common, "sv-fit", seed, &cfg, |dir| {
        dir.input(&a.bars)?;
        let (est, hold) = match cfg.split {
            Some(s) => split_by_days(&bars, s),
            None => (bars.clone(), Vec::new()),
        };
        check(!est.is_empty(), || "no bars to fit".into())?;
        let fit = fit_sv(&est, &cfg.sv, &mut rng(seed))?;
        if !hold.is_empty() {
            write_bars(&dir.path(HOLDOUT_FILE), &hold)?;
            dir.output(HOLDOUT_FILE)?;
        }
        write_stages(dir, &fit)?;
        dir.write_json(FIT_FILE, &fit)?;
        let summary = serde_json::json!({
            "params": fit.params,
            "mu_beta_posterior": fit.mu_beta,
            "observations": fit.observations.n() + 1,
            "windows": fit.raw_vol.len(),
        });
        dir.write_json("params.json", &summary)?;
        dir.set_audit(serde_json::json!({
            "clean": fit.clean_audit,
            "jumps_removed": fit.jumps.as_ref().map_or(0, |j| j.indices().len()),
            "floored_windows": fit.raw_vol.floored.len(),
            "interpolated_cells": fit.periodicity.as_ref().map_or(0, |p| p.interpolated.len()),
        }));
        let p = fit.params;
        println!(
            "sv-fit: mu {:.4}, beta {:.4}, alpha {:.4}, GIG({:.4}, {:.4}, {:.4e})",
            p.mu, p.beta, p.alpha, p.gig.lambda, p.gig.kappa, p.gig.eta
        );
        Ok(())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvForecastConfig {
    pub paths: usize,
    pub target: CoverageTarget,
    pub probs: Vec<f64>,
}

impl Default for SvForecastConfig {
    fn default() -> Self {
        Self { paths: 1000, target: CoverageTarget::Returns, probs: TABLE_PROBS.to_vec() }
    }
}

fn load_fit(run: &Path) -> Result<SvFit, CliError> {
    let path = run.join(FIT_FILE);
    let text = fs::read_to_string(&path).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn forecast(a: SvForecastArgs) -> Result<(), CliError> {
    let (mut cfg, replay_seed) = load_config::<SvForecastConfig>(a.common.config.as_deref())?;
    cfg.paths = a.paths.unwrap_or(cfg.paths);
    if let Some(t) = a.target {
        cfg.target = match t {
            TargetArg::Returns => CoverageTarget::Returns,
            TargetArg::LogPrice => CoverageTarget::LogPrice,
        };
    }
    if let Some(p) = &a.probs {
        cfg.probs = p.clone();
    }
    check(cfg.paths > 0, || "paths must be at least 1".into())?;
    let seed = a.common.seed.or(replay_seed).unwrap_or(0);
    let holdout = a.holdout.clone().unwrap_or_else(|| a.run.join(HOLDOUT_FILE));
    let fit = load_fit(&a.run)?;
    let bars = read_bars(&holdout)?;

    in_run_dir(&a.common, "sv-forecast", seed, &cfg, |dir| {
        dir.input(&a.run.join(FIT_FILE))?;
        dir.input(&holdout)?;
        let hr = holdout_returns(&fit, &bars)?;
        let table = forecast_coverage(&fit, &hr, &cfg.probs, cfg.paths, cfg.target, &mut rng(seed))?;
        dir.write_text("coverage.csv", &table.to_csv())?;
        dir.write_json("coverage.json", &table)?;
        for r in &table.rows {
            println!("p = {:.2}: coverage {:.3} ({}/{})", r.p, r.coverage, r.inside, r.total);
        }
        Ok(())
    })
}
