use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{ErrorReport, RawRecord};
use super::{uniform_open, Method, StudyConfig, ALPHA_RANGE};
use crate::gig::{gig_kl, GigParams};
use crate::harris::{sample_at_times, simulate, Marginal, SfHarrisParams};
use crate::inference::{
    estimate_em, estimate_mle, estimate_ndnj, gibbs_a, gibbs_b, posterior_mode, MarginalFamily, ObservationSeries,
    PointEstimate,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessFamily {
    /// Uniform on `{1, 2, 3, 4, 5}`.
    Uniform5,
    Gig,
}

impl ProcessFamily {
    fn inference_family(self) -> MarginalFamily {
        match self {
            ProcessFamily::Uniform5 => MarginalFamily::DiscreteUniform { support: Some(uniform5()) },
            ProcessFamily::Gig => MarginalFamily::Gig,
        }
    }
}

fn uniform5() -> Vec<f64> {
    vec![1.0, 2.0, 3.0, 4.0, 5.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrueProcess {
    pub alpha: f64,
    pub gig: Option<GigParams>,
}

/// `(E_alpha, E_Q)` contributions of one replication. `E_Q` is `None` for
/// a uniform marginal.
pub fn replication_errors(truth: &TrueProcess, est: &PointEstimate) -> (f64, Option<f64>) {
    let ea = ((truth.alpha - est.alpha) / ALPHA_RANGE).abs();
    let eq = match (truth.gig, est.gig) {
        (Some(t), Some(e)) => Some(gig_kl(&t, &e).unwrap_or(f64::INFINITY)),
        (Some(_), None) => Some(f64::INFINITY),
        _ => None,
    };
    (ea, eq)
}

fn draw_truth<R: Rng>(cfg: &StudyConfig, family: ProcessFamily, rng: &mut R) -> TrueProcess {
    let r = &cfg.ranges;
    let alpha = uniform_open(rng, r.alpha);
    let gig = match family {
        ProcessFamily::Uniform5 => None,
        ProcessFamily::Gig => Some(GigParams {
            lambda: uniform_open(rng, r.lambda),
            kappa: uniform_open(rng, r.kappa),
            eta: uniform_open(rng, r.eta),
        }),
    };
    TrueProcess { alpha, gig }
}

fn run_method<R: Rng>(
    method: Method,
    obs: &ObservationSeries,
    family: &MarginalFamily,
    cfg: &StudyConfig,
    rng: &mut R,
) -> Result<PointEstimate, String> {
    let e = |e: crate::inference::InferenceError| e.to_string();
    match method {
        Method::Ndnj => {
            let est = estimate_ndnj(obs, family).map_err(e)?;
            if matches!(family, MarginalFamily::Gig) && est.gig.is_none() {
                return Err("no changes observed; marginal fit unavailable".into());
            }
            Ok(PointEstimate { alpha: est.alpha, gig: est.gig })
        }
        Method::Mle => {
            let est = estimate_mle(obs, family, None).map_err(e)?;
            Ok(PointEstimate { alpha: est.alpha, gig: est.gig })
        }
        Method::Em => {
            let est = estimate_em(obs, family, None, cfg.em_tol, cfg.em_max_iter).map_err(e)?.estimate;
            Ok(PointEstimate { alpha: est.alpha, gig: est.gig })
        }
        Method::GibbsA => posterior_mode(&gibbs_a(obs, &cfg.priors, family, &cfg.gibbs, rng).map_err(e)?).map_err(e),
        Method::GibbsB => posterior_mode(&gibbs_b(obs, &cfg.priors, family, &cfg.gibbs, rng).map_err(e)?).map_err(e),
    }
}

fn replication(cfg: &StudyConfig, family: ProcessFamily, rep: usize) -> Vec<RawRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep as u64);
    let truth = draw_truth(cfg, family, &mut rng);
    let marginal = match truth.gig {
        Some(p) => Marginal::gig(p),
        None => Marginal::discrete_uniform(uniform5()),
    }
    .expect("parameters drawn inside valid ranges");
    let params = SfHarrisParams::new(truth.alpha, marginal).expect("positive alpha");
    let horizon = cfg
        .sample_sizes
        .iter()
        .map(|n| cfg.grid.step(*n) * *n as f64)
        .fold(0.0, f64::max);
    let path = simulate(&params, horizon, &mut rng, 0.0).expect("valid horizon");
    let inf_family = family.inference_family();

    let mut out = Vec::new();
    for &n in &cfg.sample_sizes {
        let step = cfg.grid.step(n);
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
        let values = sample_at_times(&path, &times).expect("grid inside the path");
        let obs = ObservationSeries::new(times, values).expect("strictly increasing grid");
        for &method in &cfg.methods {
            let result = run_method(method, &obs, &inf_family, cfg, &mut rng);
            let (estimate, error) = match result {
                Ok(est) => (Some(est), None),
                Err(msg) => (None, Some(msg)),
            };
            let (e_alpha, e_q) = match &estimate {
                Some(est) => {
                    let (a, q) = replication_errors(&truth, est);
                    (Some(a), q)
                }
                None => (None, None),
            };
            out.push(RawRecord {
                replication: rep,
                method,
                sample_size: n,
                true_alpha: truth.alpha,
                true_gig: truth.gig,
                est_alpha: estimate.map(|e| e.alpha),
                est_gig: estimate.and_then(|e| e.gig),
                e_alpha,
                e_q,
                e_mu: None,
                e_beta: None,
                failure: error,
            });
        }
    }
    out
}

/// Process-only study: every method on every sample size for each
/// replication, replications in parallel on substreams of `cfg.seed`.
pub fn run_process_study(cfg: &StudyConfig, family: ProcessFamily) -> Result<ErrorReport, String> {
    cfg.validate()?;
    let raw: Vec<RawRecord> = (0..cfg.replications)
        .into_par_iter()
        .flat_map_iter(|rep| replication(cfg, family, rep))
        .collect();
    Ok(ErrorReport::from_raw(raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_estimate_has_zero_error() {
        let truth = TrueProcess { alpha: 3.0, gig: Some(GigParams { lambda: -2.0, kappa: 4.0, eta: 1.0 }) };
        let est = PointEstimate { alpha: 3.0, gig: truth.gig };
        assert_eq!(replication_errors(&truth, &est), (0.0, Some(0.0)));
    }

    #[test]
    fn alpha_error_normalizer() {
        let truth = TrueProcess { alpha: 10.0, gig: None };
        let est = PointEstimate { alpha: 16.0, gig: None };
        assert_eq!(replication_errors(&truth, &est), (0.2, None));
    }

    #[test]
    fn small_study_is_deterministic() {
        let cfg = StudyConfig {
            replications: 2,
            sample_sizes: vec![50],
            methods: vec![Method::Ndnj, Method::GibbsB],
            gibbs: crate::inference::GibbsConfig { iters: 700, burn_in: 100, ..Default::default() },
            seed: 11,
            ..Default::default()
        };
        let a = run_process_study(&cfg, ProcessFamily::Uniform5).unwrap();
        let b = run_process_study(&cfg, ProcessFamily::Uniform5).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.raw.len(), 4);
    }
}
