//! Stochastic volatility built on a GIG-Harris spot process: minute-bar
//! cleaning, returns, realized and bipower variation, jump removal, spot
//! filtering, intraday periodicity, drift and risk-premium posterior,
//! fitting and forecast coverage.

pub mod bars;
pub mod clean;
pub mod fit;
pub mod forecast;
pub mod jumps;
pub mod mubeta;
pub mod periodicity;
pub mod returns;
pub mod spot;
pub mod synth;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gig::GigParams;

#[derive(Debug, Error)]
pub enum SvError {
    #[error("invalid bars: {0}")]
    InvalidBars(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
}

/// Drift, risk premium and the volatility process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvParams {
    pub mu: f64,
    pub beta: f64,
    pub alpha: f64,
    pub gig: GigParams,
}

pub use bars::{split_by_days, trading_days, MinuteBar, Session};
pub use clean::{clean_bars, CleanAudit, CleanedBars};
pub use fit::{fit_sv, MuBetaVolatility, SvConfig, SvFit};
pub use forecast::{forecast_coverage, holdout_returns, simulate_window_returns, CoverageRow, CoverageTable, CoverageTarget, TABLE_PROBS};
pub use jumps::{detect_jumps, JumpConfig, JumpReport, QuotaBasis};
pub use mubeta::{posterior_mu_beta, MuBetaPosterior, MuBetaPriors};
pub use periodicity::{deseasonalize, estimate_periodicity, reseasonalize, PeriodicityFunction};
pub use returns::{bipower_variation, compute_returns, realized_variance, windows, ReturnSeries, TimeAxis, Window};
pub use spot::{integrated_vol, spot_vol_filter, SpotFilter, VolSeries, SPOT_FLOOR};
pub use synth::{generate_bars, u_shape, SyntheticConfig, SyntheticData};
