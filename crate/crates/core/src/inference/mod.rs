//! Estimation for discretely observed SF-Harris paths: the no-difference
//! estimator, maximum likelihood, EM, two Gibbs samplers, posterior
//! summaries and predictive simulation.

pub mod data;
pub mod estimators;
pub mod gibbs;
pub mod likelihood;
pub mod predict;
pub mod summary;

use thiserror::Error;

use crate::gig::GigError;
use crate::harris::HarrisError;
use crate::numerics::NumericsError;

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error("need at least {need} draws, have {have}")]
    TooFewDraws { have: usize, need: usize },
    #[error("sampler failure: {0}")]
    Sampler(String),
    #[error(transparent)]
    Gig(#[from] GigError),
    #[error(transparent)]
    Harris(#[from] HarrisError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

pub use data::{MarginalFamily, ObservationSeries, Priors, QModel};
pub use estimators::{estimate_em, estimate_mle, estimate_ndnj, EmTrace, Estimate, ALPHA_MAX};
pub use gibbs::{
    arms_update, draw_alpha_gamma, gibbs, gibbs_a, gibbs_b, gibbs_parallel, sample_gig_block, AlphaConditional, Block, GibbsConfig,
    GibbsVariant, GigConditionals, LatentPolicy, PosteriorChains,
};
pub use likelihood::{fit_gig, loglik, loglik_by_enumeration, responsibilities};
pub use predict::{first_jump_summary, pointwise_hpd, predict_trajectories, FirstJumpSummary, HpdBand};
pub use summary::{hpd_interval, kde_mode, posterior_mode, silverman_bandwidth, PointEstimate};
