use serde::{Deserialize, Serialize};

use super::InferenceError;
use crate::gig::{GigDensity, GigParams};

/// Values `x_0..x_n` observed at strictly increasing times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl ObservationSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, InferenceError> {
        if times.len() != values.len() {
            return Err(InferenceError::InvalidData(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.is_empty() {
            return Err(InferenceError::InvalidData("empty series".into()));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(InferenceError::InvalidData("non-finite entry".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(InferenceError::InvalidData("times must be strictly increasing".into()));
        }
        Ok(Self { times, values })
    }

    /// Observations on the grid `t0, t0 + step, ...`.
    pub fn equally_spaced(t0: f64, step: f64, values: Vec<f64>) -> Result<Self, InferenceError> {
        let times = (0..values.len()).map(|i| t0 + step * i as f64).collect();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of transitions `n` (one less than the number of observations).
    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    /// Gap `t_i = t̂_i - t̂_{i-1}` for `i = 1..=n`.
    pub fn gap(&self, i: usize) -> f64 {
        self.times[i] - self.times[i - 1]
    }

    pub fn gaps(&self) -> Vec<f64> {
        (1..self.values.len()).map(|i| self.gap(i)).collect()
    }

    /// Whether `x_i` exactly repeats `x_{i-1}`.
    #[inline]
    pub fn is_repeat(&self, i: usize) -> bool {
        self.values[i] == self.values[i - 1]
    }

    pub fn last(&self) -> (f64, f64) {
        (*self.times.last().expect("non-empty"), *self.values.last().expect("non-empty"))
    }
}

/// Hyperparameters: `alpha ~ Exp(c)`, `lambda ~ N(mu, sigma2)`,
/// `kappa ~ Ga(a_kappa, b_kappa)`, `eta ~ Ga(a_eta, b_eta)` (shape, rate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    pub c: f64,
    pub mu_lambda: f64,
    pub sigma2_lambda: f64,
    pub a_kappa: f64,
    pub b_kappa: f64,
    pub a_eta: f64,
    pub b_eta: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Self {
            c: 1.0,
            mu_lambda: 0.0,
            sigma2_lambda: 4.0,
            a_kappa: 1.0,
            b_kappa: 1.0,
            a_eta: 1.0,
            b_eta: 1.0,
        }
    }
}

impl Priors {
    pub fn validate(&self) -> Result<(), InferenceError> {
        let positive = [self.c, self.sigma2_lambda, self.a_kappa, self.b_kappa, self.a_eta, self.b_eta];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) || !self.mu_lambda.is_finite() {
            return Err(InferenceError::InvalidData(format!("invalid priors {self:?}")));
        }
        Ok(())
    }
}

/// Parametric family assumed for the marginal law `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum MarginalFamily {
    Gig,
    /// Uniform on a finite support; the distinct observed values when `None`.
    DiscreteUniform { support: Option<Vec<f64>> },
}

impl MarginalFamily {
    pub fn uniform_support(&self, obs: &ObservationSeries) -> Option<Vec<f64>> {
        match self {
            MarginalFamily::Gig => None,
            MarginalFamily::DiscreteUniform { support: Some(s) } => Some(s.clone()),
            MarginalFamily::DiscreteUniform { support: None } => {
                let mut s = obs.values().to_vec();
                s.sort_by(f64::total_cmp);
                s.dedup();
                Some(s)
            }
        }
    }
}

/// A fully specified marginal density or mass function.
#[derive(Debug, Clone)]
pub enum QModel {
    Gig(GigDensity),
    Uniform { support: Vec<f64> },
}

impl QModel {
    pub fn gig(p: GigParams) -> Result<Self, InferenceError> {
        Ok(QModel::Gig(GigDensity::new(p)?))
    }

    pub fn for_family(family: &MarginalFamily, obs: &ObservationSeries, gig: Option<GigParams>) -> Result<Self, InferenceError> {
        match family {
            MarginalFamily::Gig => {
                let p = gig.ok_or_else(|| InferenceError::InvalidData("GIG family needs parameters".into()))?;
                Self::gig(p)
            }
            MarginalFamily::DiscreteUniform { .. } => Ok(QModel::Uniform {
                support: family.uniform_support(obs).expect("uniform family"),
            }),
        }
    }

    /// `log Q(x)`: a log density for GIG, a log mass for the uniform law.
    #[inline]
    pub fn ln_q(&self, x: f64) -> f64 {
        match self {
            QModel::Gig(d) => d.ln_pdf(x),
            QModel::Uniform { support } => {
                if support.contains(&x) {
                    -(support.len() as f64).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }
}
