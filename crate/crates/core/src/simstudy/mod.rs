//! Randomized testing: draw parameters uniformly, simulate, estimate with
//! every method and average normalized errors.

mod process;
mod report;
mod sv;

pub use process::{replication_errors, run_process_study, ProcessFamily, TrueProcess};
pub use report::{ErrorReport, ErrorRow, RawRecord};
pub use sv::{run_sv_study, sv_errors, SvStudySettings};

use serde::{Deserialize, Serialize};

use crate::inference::{GibbsConfig, Priors};

/// Normalizer of the `alpha` error.
pub const ALPHA_RANGE: f64 = 30.0;
/// Normalizer of the drift and risk-premium errors.
pub const MU_BETA_RANGE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ndnj,
    Mle,
    Em,
    GibbsA,
    GibbsB,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Ndnj, Method::Mle, Method::Em, Method::GibbsA, Method::GibbsB];

    pub fn name(self) -> &'static str {
        match self {
            Method::Ndnj => "ndnj",
            Method::Mle => "mle",
            Method::Em => "em",
            Method::GibbsA => "gibbs-a",
            Method::GibbsB => "gibbs-b",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown method {s:?}"))
    }
}

/// Where a "sample of length n" is observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationGrid {
    /// Gaps of one time unit, so the horizon grows with `n`.
    UnitSteps,
    /// `n` equal gaps covering `[0, T]`.
    FixedHorizon(f64),
}

impl ObservationGrid {
    pub fn step(&self, n: usize) -> f64 {
        match self {
            ObservationGrid::UnitSteps => 1.0,
            ObservationGrid::FixedHorizon(t) => t / n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterRanges {
    pub alpha: (f64, f64),
    pub lambda: (f64, f64),
    pub kappa: (f64, f64),
    pub eta: (f64, f64),
    pub mu: (f64, f64),
    pub beta: (f64, f64),
}

impl Default for ParameterRanges {
    fn default() -> Self {
        Self {
            alpha: (0.0, 30.0),
            lambda: (-5.0, 5.0),
            kappa: (0.0, 50.0),
            eta: (0.0, 4.0),
            mu: (-2.0, 2.0),
            beta: (-2.0, 2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub replications: usize,
    pub sample_sizes: Vec<usize>,
    pub ranges: ParameterRanges,
    pub methods: Vec<Method>,
    pub grid: ObservationGrid,
    pub priors: Priors,
    pub gibbs: GibbsConfig,
    pub em_tol: f64,
    pub em_max_iter: usize,
    pub sv: SvStudySettings,
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            replications: 20,
            sample_sizes: vec![20, 100, 500, 1000],
            ranges: ParameterRanges::default(),
            methods: Method::ALL.to_vec(),
            grid: ObservationGrid::FixedHorizon(40.0),
            priors: Priors::default(),
            gibbs: GibbsConfig::default(),
            em_tol: 1e-8,
            em_max_iter: 500,
            sv: SvStudySettings::default(),
            seed: 0,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.replications == 0 {
            return Err("replications must be at least 1".into());
        }
        if self.sample_sizes.is_empty() || self.sample_sizes.contains(&0) {
            return Err("sample sizes must be positive".into());
        }
        if self.methods.is_empty() {
            return Err("no methods selected".into());
        }
        if let ObservationGrid::FixedHorizon(t) = self.grid {
            if !(t > 0.0 && t.is_finite()) {
                return Err(format!("horizon must be positive, got {t}"));
            }
        }
        let r = &self.ranges;
        for (name, (lo, hi)) in [
            ("alpha", r.alpha),
            ("lambda", r.lambda),
            ("kappa", r.kappa),
            ("eta", r.eta),
            ("mu", r.mu),
            ("beta", r.beta),
        ] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(format!("empty range for {name}"));
            }
        }
        if r.alpha.0 < 0.0 || r.kappa.0 < 0.0 || r.eta.0 < 0.0 {
            return Err("alpha, kappa and eta ranges must be non-negative".into());
        }
        self.priors.validate().map_err(|e| e.to_string())
    }
}

/// Uniform draw on the open interval, redrawn away from the endpoints.
pub(crate) fn uniform_open<R: rand::Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    loop {
        let v = lo + (hi - lo) * rng.random::<f64>();
        if v > lo && v < hi {
            return v;
        }
    }
}
