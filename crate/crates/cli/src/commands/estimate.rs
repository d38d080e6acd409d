use serde::{Deserialize, Serialize};
use sfharris::gig::GigParams;
use sfharris::inference::{
    estimate_em, estimate_mle, estimate_ndnj, gibbs_parallel, posterior_mode, GibbsConfig, GibbsVariant, LatentPolicy,
    PosteriorChains, Priors,
};
use sfharris::io::{read_observations, write_chains};
use sfharris::simstudy::Method;

use super::{check, in_run_dir, inference_family, Family};
use crate::cli::{EstimateArgs, GibbsFlags, LatentArg};
use crate::error::CliError;
use crate::manifest::load_config;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EstimateConfig {
    pub methods: Vec<Method>,
    pub family: Family,
    pub support: Option<Vec<f64>>,
    pub priors: Priors,
    pub gibbs: GibbsConfig,
    pub chains: usize,
    pub em_tol: f64,
    pub em_max_iter: usize,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        Self {
            methods: vec![Method::Ndnj],
            family: Family::Gig,
            support: None,
            priors: Priors::default(),
            gibbs: GibbsConfig::default(),
            chains: 1,
            em_tol: 1e-8,
            em_max_iter: 500,
        }
    }
}

pub fn apply_gibbs(g: &mut GibbsConfig, f: &GibbsFlags) {
    g.iters = f.iters.unwrap_or(g.iters);
    g.burn_in = f.burn_in.unwrap_or(g.burn_in);
    g.thin = f.thin.unwrap_or(g.thin);
    if let Some(l) = f.latent {
        g.latent = Some(match l {
            LatentArg::Observed => LatentPolicy::Observed,
            LatentArg::Sampled => LatentPolicy::Sampled,
        });
    }
}

pub fn check_gibbs(g: &GibbsConfig) -> Result<(), CliError> {
    check(g.thin >= 1, || "thinning must be at least 1".into())?;
    check(g.iters > g.burn_in, || format!("iterations ({}) must exceed the burn-in ({})", g.iters, g.burn_in))
}

#[derive(Debug, Clone, Serialize)]
struct MethodResult {
    method: Method,
    alpha: f64,
    gig: Option<GigParams>,
    loglik: Option<f64>,
    converged: Option<bool>,
    iterations: Option<usize>,
    flags: Vec<String>,
    /// Chain files of a Gibbs method, one per chain.
    chain_files: Vec<String>,
    /// Posterior mean of `alpha` over all chains.
    alpha_mean: Option<f64>,
}

/// Seed offset of a method, so a chain does not depend on which other
/// methods run alongside it.
fn method_offset(m: Method) -> u64 {
    Method::ALL.iter().position(|x| *x == m).unwrap_or(0) as u64
}

fn merge(chains: &[PosteriorChains]) -> PosteriorChains {
    let mut all = chains[0].clone();
    for c in &chains[1..] {
        all.alpha.extend(&c.alpha);
        all.gig.extend(&c.gig);
        all.m.extend(&c.m);
    }
    all.z = None;
    all
}

pub fn run(a: EstimateArgs) -> Result<(), CliError> {
    let (mut cfg, replay_seed) = load_config::<EstimateConfig>(a.common.config.as_deref())?;
    if let Some(m) = &a.methods {
        cfg.methods = m.clone();
    }
    if let Some(f) = a.family {
        cfg.family = f.into();
    }
    if a.support.is_some() {
        cfg.support = a.support.clone();
    }
    apply_gibbs(&mut cfg.gibbs, &a.gibbs);
    cfg.chains = a.chains.unwrap_or(cfg.chains);
    check(!cfg.methods.is_empty(), || "no methods selected".into())?;
    check(cfg.chains >= 1, || "chains must be at least 1".into())?;
    check_gibbs(&cfg.gibbs)?;
    cfg.priors.validate()?;
    let seed = a.common.seed.or(replay_seed).unwrap_or(0);
    let obs = read_observations(&a.input)?;
    let family = inference_family(cfg.family, &cfg.support);

    in_run_dir(&a.common, "estimate", seed, &cfg, |dir| {
        dir.input(&a.input)?;
        let mut results = Vec::new();
        for method in &cfg.methods {
            let point = |e: sfharris::inference::Estimate| MethodResult {
                method: *method,
                alpha: e.alpha,
                gig: e.gig,
                loglik: e.loglik,
                converged: Some(e.converged),
                iterations: Some(e.iterations),
                flags: e.flags,
                chain_files: Vec::new(),
                alpha_mean: None,
            };
            let res = match method {
                Method::Ndnj => point(estimate_ndnj(&obs, &family)?),
                Method::Mle => point(estimate_mle(&obs, &family, None)?),
                Method::Em => point(estimate_em(&obs, &family, None, cfg.em_tol, cfg.em_max_iter)?.estimate),
                Method::GibbsA | Method::GibbsB => {
                    let variant = if *method == Method::GibbsA { GibbsVariant::A } else { GibbsVariant::B };
                    let chains = gibbs_parallel(
                        &obs,
                        &cfg.priors,
                        &family,
                        variant,
                        &cfg.gibbs,
                        seed.wrapping_add(method_offset(*method)),
                        cfg.chains,
                    )?;
                    let mut files = Vec::new();
                    for (j, c) in chains.iter().enumerate() {
                        let name = if cfg.chains == 1 {
                            format!("chains-{}.csv", method.name())
                        } else {
                            format!("chains-{}-{j}.csv", method.name())
                        };
                        write_chains(&dir.path(&name), c)?;
                        dir.output(&name)?;
                        files.push(name);
                    }
                    let all = merge(&chains);
                    let mode = posterior_mode(&all)?;
                    MethodResult {
                        method: *method,
                        alpha: mode.alpha,
                        gig: mode.gig,
                        loglik: None,
                        converged: None,
                        iterations: None,
                        flags: Vec::new(),
                        chain_files: files,
                        alpha_mean: Some(all.alpha.iter().sum::<f64>() / all.alpha.len() as f64),
                    }
                }
            };
            println!("{:>8}: alpha = {:.6}{}", method.name(), res.alpha, res.gig.map_or(String::new(), |g| format!(
                ", GIG({:.4}, {:.4}, {:.4})",
                g.lambda, g.kappa, g.eta
            )));
            results.push(res);
        }
        dir.write_json("estimates.json", &results)?;
        Ok(())
    })
}
