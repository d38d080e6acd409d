//! Special functions, optimizers, quadrature and the ARMS sampler.

pub mod arms;
pub mod bessel;
pub mod optimize;
pub mod quad;
pub mod stats;

pub use arms::{arms_sample, ArmsOptions, ArmsState};
pub use bessel::{bessel_k, bessel_k_dorder, bessel_ratio, log_bessel_k, log_bessel_k_dorder};
pub use optimize::{bfgs, nelder_mead, OptimizeOptions, OptimizerResult};
pub use quad::{quad_integrate, QuadResult};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("quadrature did not converge: estimate {estimate}, error {error}")]
    QuadNonConvergence { estimate: f64, error: f64 },
    #[error("objective is not finite at the starting point")]
    NonFiniteStart,
    #[error("ARMS initialization failed: {0}")]
    ArmsInit(String),
}
