pub mod estimate;
pub mod predict;
pub mod simulate;
pub mod study;
pub mod sv;

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sfharris::gig::GigParams;
use sfharris::inference::MarginalFamily;

use crate::cli::{Common, FamilyKind};
use crate::error::CliError;
use crate::manifest::RunDir;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    #[default]
    Gig,
    Uniform,
}

impl From<FamilyKind> for Family {
    fn from(k: FamilyKind) -> Self {
        match k {
            FamilyKind::Gig => Family::Gig,
            FamilyKind::Uniform => Family::Uniform,
        }
    }
}

/// Family used for estimation; a uniform family without a support takes
/// the distinct observed values.
pub fn inference_family(family: Family, support: &Option<Vec<f64>>) -> MarginalFamily {
    match family {
        Family::Gig => MarginalFamily::Gig,
        Family::Uniform => MarginalFamily::DiscreteUniform { support: support.clone() },
    }
}

pub fn default_gig() -> GigParams {
    GigParams { lambda: -2.0, kappa: 4.0, eta: 1.0 }
}

/// Runs `body` inside a fresh run directory and writes the manifest
/// whatever the outcome.
pub fn in_run_dir<C: Serialize>(
    common: &Common,
    command: &str,
    seed: u64,
    cfg: &C,
    body: impl FnOnce(&mut RunDir) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let root = common.out.clone().unwrap_or_else(|| PathBuf::from(format!("sfharris-{command}-{seed}")));
    let mut dir = RunDir::create(root, command, seed, common.threads)?;
    dir.set_config(cfg)?;
    let result = body(&mut dir);
    let root = dir.root.clone();
    dir.finish(&result)?;
    if result.is_ok() {
        println!("{command}: wrote {}", root.display());
    }
    result
}

pub fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), CliError> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Invalid(msg()))
    }
}
