use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{ErrorReport, RawRecord};
use super::{uniform_open, Method, StudyConfig, ALPHA_RANGE, MU_BETA_RANGE};
use crate::gig::{gig_kl, GigParams};
use crate::sv::{fit_sv, generate_bars, SpotFilter, SvConfig, SvParams, SyntheticConfig};

/// Synthetic market and pipeline settings of the volatility study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvStudySettings {
    pub days: usize,
    pub fit: SvConfig,
}

impl Default for SvStudySettings {
    /// 12600 trading days on a 126-day time unit (100 units), with
    /// change-point spot filtering.
    fn default() -> Self {
        Self {
            days: 12600,
            fit: SvConfig {
                time_unit_days: 126.0,
                spot_filter: SpotFilter::ChangePoint { penalty_scale: 0.6 },
                ..SvConfig::default()
            },
        }
    }
}

/// Absolute errors `(E_mu, E_beta, E_alpha, E_Q)` of one fit.
pub fn sv_errors(truth: &SvParams, est: &SvParams) -> (f64, f64, f64, f64) {
    (
        ((truth.mu - est.mu) / MU_BETA_RANGE).abs(),
        ((truth.beta - est.beta) / MU_BETA_RANGE).abs(),
        ((truth.alpha - est.alpha) / ALPHA_RANGE).abs(),
        gig_kl(&truth.gig, &est.gig).unwrap_or(f64::INFINITY),
    )
}

fn sv_replication(cfg: &StudyConfig, rep: usize) -> RawRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(rep as u64);
    let r = &cfg.ranges;
    let truth = SvParams {
        mu: uniform_open(&mut rng, r.mu),
        beta: uniform_open(&mut rng, r.beta),
        alpha: uniform_open(&mut rng, r.alpha),
        gig: GigParams {
            lambda: uniform_open(&mut rng, r.lambda),
            kappa: uniform_open(&mut rng, r.kappa),
            eta: uniform_open(&mut rng, r.eta),
        },
    };
    let s = &cfg.sv;
    let synth = SyntheticConfig {
        days: s.days,
        session: s.fit.session,
        time_unit_days: s.fit.time_unit_days,
        params: truth,
        ..Default::default()
    };
    let result = generate_bars(&synth, &mut rng)
        .and_then(|d| fit_sv(&d.bars, &s.fit, &mut rng))
        .map(|f| f.params);
    let mut rec = RawRecord {
        replication: rep,
        method: Method::GibbsB,
        sample_size: s.days,
        true_alpha: truth.alpha,
        true_gig: Some(truth.gig),
        est_alpha: None,
        est_gig: None,
        e_alpha: None,
        e_q: None,
        e_mu: None,
        e_beta: None,
        failure: None,
    };
    match result {
        Ok(est) => {
            let (em, eb, ea, eq) = sv_errors(&truth, &est);
            rec.est_alpha = Some(est.alpha);
            rec.est_gig = Some(est.gig);
            rec.e_mu = Some(em);
            rec.e_beta = Some(eb);
            rec.e_alpha = Some(ea);
            rec.e_q = Some(eq);
        }
        Err(e) => rec.failure = Some(e.to_string()),
    }
    rec
}

/// Full pipeline on synthetic bars for each replication. Rows carry the
/// method `gibbs-b` and the number of simulated days as the sample size.
pub fn run_sv_study(cfg: &StudyConfig) -> Result<ErrorReport, String> {
    cfg.validate()?;
    if cfg.sv.days == 0 {
        return Err("days must be positive".into());
    }
    let raw = (0..cfg.replications).into_par_iter().map(|rep| sv_replication(cfg, rep)).collect();
    Ok(ErrorReport::from_raw(raw))
}
