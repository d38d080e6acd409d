//! The generalized inverse Gaussian law `GIG(lambda, kappa, eta)` with density
//!
//! `x^(lambda-1) exp(-(kappa/2)(eta/x + x/eta)) / (2 eta^lambda K_lambda(kappa))`
//!
//! on `(0, inf)`. `eta` is a scale parameter; `kappa` controls concentration.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{self, bessel_ratio, log_bessel_k, log_bessel_k_dorder, NumericsError};

/// Below this concentration the density is treated as degenerate.
pub const KAPPA_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GigError {
    #[error("invalid GIG parameters: {0}")]
    InvalidParams(String),
    #[error("GIG density is undefined at x = {0}")]
    Domain(f64),
    #[error("kappa = {0} is below the supported floor; the density is improper")]
    DegenerateKappa(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GigParams {
    pub lambda: f64,
    pub kappa: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GigMoments {
    pub mean: f64,
    pub inv_mean: f64,
    pub log_mean: f64,
}

impl GigParams {
    pub fn new(lambda: f64, kappa: f64, eta: f64) -> Result<Self, GigError> {
        let p = Self { lambda, kappa, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GigError> {
        let Self { lambda, kappa, eta } = *self;
        if !lambda.is_finite() || !kappa.is_finite() || !eta.is_finite() {
            return Err(GigError::InvalidParams(format!("non-finite parameters {self:?}")));
        }
        if eta <= 0.0 {
            return Err(GigError::InvalidParams(format!("eta must be positive, got {eta}")));
        }
        if kappa < 0.0 {
            return Err(GigError::InvalidParams(format!("kappa must be non-negative, got {kappa}")));
        }
        if kappa == 0.0 && lambda == 0.0 {
            return Err(GigError::InvalidParams("kappa must be positive when lambda = 0".into()));
        }
        Ok(())
    }

    fn require_kappa(&self) -> Result<(), GigError> {
        self.validate()?;
        if self.kappa < KAPPA_FLOOR {
            return Err(GigError::DegenerateKappa(self.kappa));
        }
        Ok(())
    }

    /// `log(2 eta^lambda K_lambda(kappa))`.
    pub fn log_normalizer(&self) -> Result<f64, GigError> {
        self.require_kappa()?;
        Ok(std::f64::consts::LN_2 + self.lambda * self.eta.ln() + log_bessel_k(self.lambda, self.kappa)?)
    }

    /// Unnormalized log density.
    #[inline]
    pub fn log_kernel(&self, x: f64) -> f64 {
        (self.lambda - 1.0) * x.ln() - 0.5 * self.kappa * (self.eta / x + x / self.eta)
    }

    /// Parameters of the law of `1/X`.
    pub fn reciprocal(&self) -> Self {
        Self {
            lambda: -self.lambda,
            kappa: self.kappa,
            eta: 1.0 / self.eta,
        }
    }
}

/// Log density at `x`.
pub fn gig_logpdf(p: &GigParams, x: f64) -> Result<f64, GigError> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(GigError::Domain(x));
    }
    Ok(p.log_kernel(x) - p.log_normalizer()?)
}

/// Density evaluator with the normalizing constant cached.
#[derive(Debug, Clone, Copy)]
pub struct GigDensity {
    pub params: GigParams,
    log_norm: f64,
}

impl GigDensity {
    pub fn new(params: GigParams) -> Result<Self, GigError> {
        Ok(Self {
            params,
            log_norm: params.log_normalizer()?,
        })
    }

    /// Log density; `-inf` outside the support.
    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x > 0.0 {
            self.params.log_kernel(x) - self.log_norm
        } else {
            f64::NEG_INFINITY
        }
    }

    #[inline]
    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }
}

/// `E[X]`, `E[1/X]` and `E[log X]`.
pub fn gig_moments(p: &GigParams) -> Result<GigMoments, GigError> {
    p.require_kappa()?;
    let r = bessel_ratio(p.lambda, p.kappa)?;
    Ok(GigMoments {
        mean: r * p.eta,
        inv_mean: (r - 2.0 * p.lambda / p.kappa) / p.eta,
        log_mean: p.eta.ln() + log_bessel_k_dorder(p.lambda, p.kappa)?,
    })
}

/// Kullback-Leibler divergence `KL(p || q)` in closed form.
pub fn gig_kl(p: &GigParams, q: &GigParams) -> Result<f64, GigError> {
    p.require_kappa()?;
    q.require_kappa()?;
    if p == q {
        return Ok(0.0);
    }
    let m = gig_moments(p)?;
    let f = log_bessel_k(q.lambda, q.kappa)? - log_bessel_k(p.lambda, p.kappa)? + q.lambda * q.eta.ln()
        - p.lambda * p.eta.ln();
    let kl = f + (p.lambda - q.lambda) * m.log_mean
        - 0.5 * ((p.kappa * p.eta - q.kappa * q.eta) * m.inv_mean + (p.kappa / p.eta - q.kappa / q.eta) * m.mean);
    Ok(kl.max(0.0))
}

/// `P(X <= x)` by adaptive quadrature of the density.
pub fn gig_cdf(p: &GigParams, x: f64) -> Result<f64, GigError> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    let d = GigDensity::new(*p)?;
    let r = numerics::quad_integrate(|t| d.pdf(t), 0.0, x, 1e-11)?;
    Ok(r.value.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy)]
enum Method {
    RouShift {
        t: f64,
        s: f64,
        xm: f64,
        nc: f64,
        uminus: f64,
        uplus: f64,
    },
    RouNoShift {
        t: f64,
        s: f64,
        nc: f64,
        um: f64,
    },
    ThreePiece {
        x0: f64,
        k0: f64,
        k1: f64,
        k2: f64,
        a: [f64; 3],
    },
}

/// Reusable sampler for one parameter set.
///
/// Draws from the two-parameter law `y^(l-1) exp(-(w/2)(y + 1/y))` with
/// `l = |lambda|` and `w = kappa`, inverts when `lambda < 0`, then scales by
/// `eta`. The standard-law sampler dispatches between ratio-of-uniforms with
/// and without mode shift and a three-piece rejection envelope for the
/// small-`l`, small-`w` corner, following Hörmann and Leydold (2014).
#[derive(Debug, Clone, Copy)]
pub struct GigSampler {
    params: GigParams,
    lambda: f64,
    omega: f64,
    invert: bool,
    method: Method,
}

fn std_mode(lambda: f64, omega: f64) -> f64 {
    if lambda >= 1.0 {
        ((lambda - 1.0).powi(2) + omega * omega).sqrt() / omega + (lambda - 1.0) / omega
    } else {
        omega / (((1.0 - lambda).powi(2) + omega * omega).sqrt() + (1.0 - lambda))
    }
}

impl GigSampler {
    pub fn new(params: GigParams) -> Result<Self, GigError> {
        params.require_kappa()?;
        let lambda = params.lambda.abs();
        let omega = params.kappa;
        let method = if lambda > 2.0 || omega > 3.0 {
            let t = 0.5 * (lambda - 1.0);
            let s = 0.25 * omega;
            let xm = std_mode(lambda, omega);
            let nc = t * xm.ln() - s * (xm + 1.0 / xm);
            let a = -(2.0 * (lambda + 1.0) / omega + xm);
            let b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
            let c = xm;
            let p = b - a * a / 3.0;
            let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
            let fi = (-q / (2.0 * (-(p * p * p) / 27.0).sqrt())).clamp(-1.0, 1.0).acos();
            let fak = 2.0 * (-p / 3.0).sqrt();
            let y1 = fak * (fi / 3.0).cos() - a / 3.0;
            let y2 = fak * (fi / 3.0 + 4.0 / 3.0 * std::f64::consts::PI).cos() - a / 3.0;
            let uplus = (y1 - xm) * (t * y1.ln() - s * (y1 + 1.0 / y1) - nc).exp();
            let uminus = (y2 - xm) * (t * y2.ln() - s * (y2 + 1.0 / y2) - nc).exp();
            Method::RouShift {
                t,
                s,
                xm,
                nc,
                uminus,
                uplus,
            }
        } else if lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2 {
            let t = 0.5 * (lambda - 1.0);
            let s = 0.25 * omega;
            let xm = std_mode(lambda, omega);
            let nc = t * xm.ln() - s * (xm + 1.0 / xm);
            let ym = ((lambda + 1.0) + ((lambda + 1.0).powi(2) + omega * omega).sqrt()) / omega;
            let um = (0.5 * (lambda + 1.0) * ym.ln() - s * (ym + 1.0 / ym) - nc).exp();
            Method::RouNoShift { t, s, nc, um }
        } else {
            let xm = std_mode(lambda, omega);
            let x0 = omega / (1.0 - lambda);
            let k0 = ((lambda - 1.0) * xm.ln() - 0.5 * omega * (xm + 1.0 / xm)).exp();
            let a0 = k0 * x0;
            let (k1, a1, k2, a2) = if x0 >= 2.0 / omega {
                let k2 = x0.powf(lambda - 1.0);
                (0.0, 0.0, k2, k2 * 2.0 * (-omega * x0 / 2.0).exp() / omega)
            } else {
                let k1 = (-omega).exp();
                let a1 = if lambda == 0.0 {
                    k1 * (2.0 / (omega * omega)).ln()
                } else {
                    k1 / lambda * ((2.0 / omega).powf(lambda) - x0.powf(lambda))
                };
                let k2 = (2.0 / omega).powf(lambda - 1.0);
                (k1, a1, k2, k2 * 2.0 * (-1.0f64).exp() / omega)
            };
            Method::ThreePiece {
                x0,
                k0,
                k1,
                k2,
                a: [a0, a1, a2],
            }
        };
        Ok(Self {
            params,
            lambda,
            omega,
            invert: params.lambda < 0.0,
            method,
        })
    }

    pub fn params(&self) -> &GigParams {
        &self.params
    }

    fn sample_standard<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let (lambda, omega) = (self.lambda, self.omega);
        match self.method {
            Method::RouShift {
                t,
                s,
                xm,
                nc,
                uminus,
                uplus,
            } => loop {
                let u = uminus + rng.random::<f64>() * (uplus - uminus);
                let v: f64 = rng.random();
                let x = u / v + xm;
                if x > 0.0 && v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
                    return x;
                }
            },
            Method::RouNoShift { t, s, nc, um } => loop {
                let u = um * rng.random::<f64>();
                let v: f64 = rng.random();
                let x = u / v;
                if x > 0.0 && v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
                    return x;
                }
            },
            Method::ThreePiece { x0, k0, k1, k2, a } => {
                let total = a[0] + a[1] + a[2];
                loop {
                    let mut v = total * rng.random::<f64>();
                    let (x, hx) = if v <= a[0] {
                        (x0 * v / a[0], k0)
                    } else {
                        v -= a[0];
                        if v <= a[1] {
                            if lambda == 0.0 {
                                let x = omega * (omega.exp() * v).exp();
                                (x, k1 / x)
                            } else {
                                let x = (x0.powf(lambda) + lambda / k1 * v).powf(1.0 / lambda);
                                (x, k1 * x.powf(lambda - 1.0))
                            }
                        } else {
                            v -= a[1];
                            let lo = if x0 > 2.0 / omega { x0 } else { 2.0 / omega };
                            let x = -2.0 / omega * ((-omega / 2.0 * lo).exp() - omega / (2.0 * k2) * v).ln();
                            (x, k2 * (-omega / 2.0 * x).exp())
                        }
                    };
                    let u = rng.random::<f64>() * hx;
                    if x > 0.0 && u.ln() <= (lambda - 1.0) * x.ln() - omega / 2.0 * (x + 1.0 / x) {
                        return x;
                    }
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let y = self.sample_standard(rng);
        let y = if self.invert { 1.0 / y } else { y };
        self.params.eta * y
    }
}

/// `n` independent draws.
pub fn gig_sample<R: Rng + ?Sized>(p: &GigParams, n: usize, rng: &mut R) -> Result<Vec<f64>, GigError> {
    if n == 0 {
        p.validate()?;
        return Ok(Vec::new());
    }
    let s = GigSampler::new(*p)?;
    Ok((0..n).map(|_| s.sample(rng)).collect())
}

/// Weighted sufficient statistics of a sample for the GIG likelihood:
/// total weight `m`, `sum w log x`, `sum w / x`, `sum w x`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GigSuffStats {
    pub m: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl GigSuffStats {
    pub fn push(&mut self, x: f64, w: f64) {
        self.m += w;
        self.s1 += w * x.ln();
        self.s2 += w / x;
        self.s3 += w * x;
    }

    pub fn from_values(xs: impl IntoIterator<Item = f64>) -> Self {
        let mut s = Self::default();
        for x in xs {
            s.push(x, 1.0);
        }
        s
    }

    /// `sum w log q(x | p)`; `-inf` for invalid or degenerate parameters.
    pub fn log_likelihood(&self, p: &GigParams) -> f64 {
        match p.log_normalizer() {
            Ok(ln) => {
                (p.lambda - 1.0) * self.s1 - 0.5 * p.kappa * (p.eta * self.s2 + self.s3 / p.eta) - self.m * ln
            }
            Err(_) => f64::NEG_INFINITY,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validation_rules() {
        assert!(GigParams::new(0.0, 0.0, 1.0).is_err());
        assert!(GigParams::new(1.0, -1.0, 1.0).is_err());
        assert!(GigParams::new(1.0, 1.0, 0.0).is_err());
        assert!(GigParams::new(2.0, 0.0, 1.0).is_ok());
        let p = GigParams::new(2.0, 0.0, 1.0).unwrap();
        assert_eq!(gig_moments(&p).unwrap_err(), GigError::DegenerateKappa(0.0));
    }

    #[test]
    fn logpdf_domain() {
        let p = GigParams::new(-2.0, 4.0, 1.0).unwrap();
        assert!(matches!(gig_logpdf(&p, 0.0), Err(GigError::Domain(_))));
        assert!(gig_logpdf(&p, 1.0).unwrap().is_finite());
    }

    #[test]
    fn half_order_closed_form_ratio() {
        // order 1/2: density ∝ x^{-1/2} exp(-(k/2)(e/x + x/e))
        let (k, e) = (1.7, 2.3);
        let p = GigParams::new(0.5, k, e).unwrap();
        let lhs = gig_logpdf(&p, 2.0).unwrap() - gig_logpdf(&p, 1.0).unwrap();
        let rhs = -0.5 * 2f64.ln() - 0.5 * k * (e / 2.0 + 2.0 / e) + 0.5 * k * (e + 1.0 / e);
        assert!((lhs - rhs).abs() < 1e-13);
    }

    #[test]
    fn half_order_mean() {
        // K_{3/2}/K_{1/2} = 1 + 1/x
        let m = gig_moments(&GigParams::new(0.5, 2.0, 1.0).unwrap()).unwrap();
        assert!((m.mean - 1.5).abs() < 1e-12);
    }

    #[test]
    fn reciprocal_symmetry() {
        let p = GigParams::new(1.3, 2.2, 0.7).unwrap();
        let a = gig_moments(&p).unwrap();
        let b = gig_moments(&p.reciprocal()).unwrap();
        assert!((a.inv_mean - b.mean).abs() < 1e-10 * a.inv_mean);
        assert!((a.log_mean + b.log_mean).abs() < 1e-8);
    }

    #[test]
    fn kl_identity_is_zero() {
        let p = GigParams::new(0.0, 3.0, 4.0).unwrap();
        assert_eq!(gig_kl(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn empty_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = GigParams::new(-2.0, 4.0, 1.0).unwrap();
        assert!(gig_sample(&p, 0, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn every_sampler_branch_hits_the_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // shifted ROU, unshifted ROU, three-piece envelope, negative order
        for &(l, k, e) in &[(4.0, 1.0, 2.0), (0.5, 0.5, 1.0), (0.2, 0.05, 1.5), (0.0, 0.1, 1.0), (-2.0, 4.0, 1.0)] {
            let p = GigParams::new(l, k, e).unwrap();
            let xs = gig_sample(&p, 200_000, &mut rng).unwrap();
            let logs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
            let m = gig_moments(&p).unwrap();
            let lm = numerics::stats::mean(&logs);
            let se = (numerics::stats::variance(&logs) / logs.len() as f64).sqrt();
            assert!((lm - m.log_mean).abs() < 4.0 * se, "({l},{k},{e}): {lm} vs {}", m.log_mean);
        }
    }

    #[test]
    fn suff_stats_match_pointwise_sum() {
        let p = GigParams::new(-0.7, 2.5, 1.3).unwrap();
        let xs = [0.3, 1.1, 2.4, 0.9];
        let s = GigSuffStats::from_values(xs);
        let direct: f64 = xs.iter().map(|x| gig_logpdf(&p, *x).unwrap()).sum();
        assert!((s.log_likelihood(&p) - direct).abs() < 1e-12);
    }
}
