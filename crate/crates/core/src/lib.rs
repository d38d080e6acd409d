//! Simulation and estimation for the SF-Harris piecewise-constant Markov
//! process, the generalized inverse Gaussian law, and a stochastic-volatility
//! pipeline built on both.

pub mod gig;
pub mod harris;
pub mod inference;
pub mod io;
pub mod numerics;
pub mod simstudy;
pub mod sv;
