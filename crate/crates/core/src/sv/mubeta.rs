use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::SvError;

/// Independent Gaussian priors on the drift and the risk premium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuBetaPriors {
    pub mu_mean: f64,
    pub mu_var: f64,
    pub beta_mean: f64,
    pub beta_var: f64,
}

impl Default for MuBetaPriors {
    fn default() -> Self {
        Self { mu_mean: 0.0, mu_var: 100.0, beta_mean: 0.0, beta_var: 100.0 }
    }
}

/// Joint Gaussian posterior of `(mu, beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuBetaPosterior {
    pub mu_mean: f64,
    pub mu_var: f64,
    pub beta_mean: f64,
    pub beta_var: f64,
    pub cov: f64,
}

impl MuBetaPosterior {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        let l11 = self.mu_var.sqrt();
        let l21 = self.cov / l11;
        let l22 = (self.beta_var - l21 * l21).max(0.0).sqrt();
        (self.mu_mean + l11 * z1, self.beta_mean + l21 * z1 + l22 * z2)
    }
}

/// Conjugate update for `R_i ~ N(mu h_i + beta H_i, H_i)`.
///
/// With `A = sum h^2/H + 1/s_mu`, `B = sum h R/H + m_mu/s_mu`, `C = sum h`,
/// `D = sum H + 1/s_beta`, `E = sum R + m_beta/s_beta` and `F = AD - C^2`
/// the posterior means are `(DB - EC)/F` and `(EA - BC)/F`, the variances
/// `D/F` and `A/F`, and the covariance `-C/F`.
pub fn posterior_mu_beta(steps: &[f64], returns: &[f64], h_star: &[f64], priors: &MuBetaPriors) -> Result<MuBetaPosterior, SvError> {
    if steps.len() != returns.len() || returns.len() != h_star.len() {
        return Err(SvError::InvalidConfig("steps, returns and volatility increments differ in length".into()));
    }
    if !(priors.mu_var > 0.0 && priors.beta_var > 0.0) {
        return Err(SvError::InvalidConfig("prior variances must be positive".into()));
    }
    if h_star.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(SvError::Degenerate("volatility increments must be positive".into()));
    }
    let (mut a, mut b, mut c, mut d, mut e) = (1.0 / priors.mu_var, priors.mu_mean / priors.mu_var, 0.0, 1.0 / priors.beta_var, priors.beta_mean / priors.beta_var);
    for ((h, r), v) in steps.iter().zip(returns).zip(h_star) {
        a += h * h / v;
        b += h * r / v;
        c += h;
        d += v;
        e += r;
    }
    let f = a * d - c * c;
    if !(f > 0.0) || !f.is_finite() {
        return Err(SvError::Degenerate(format!("degenerate mu/beta posterior, F = {f}")));
    }
    Ok(MuBetaPosterior {
        mu_mean: (d * b - e * c) / f,
        mu_var: d / f,
        beta_mean: (e * a - b * c) / f,
        beta_var: a / f,
        cov: -c / f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flat_prior_mu_only_is_weighted_least_squares() {
        let h = [0.5, 0.5, 0.5];
        let r = [0.3, -0.1, 0.4];
        let v = [0.2, 0.5, 1.0];
        let pr = MuBetaPriors { mu_mean: 0.0, mu_var: 1e12, beta_mean: 0.0, beta_var: 1e-12 };
        let p = posterior_mu_beta(&h, &r, &v, &pr).unwrap();
        let num: f64 = (0..3).map(|i| r[i] * h[i] / v[i]).sum();
        let den: f64 = (0..3).map(|i| h[i] * h[i] / v[i]).sum();
        assert!((p.mu_mean - num / den).abs() < 1e-9);
        assert!(p.beta_mean.abs() < 1e-9);
    }

    #[test]
    fn joint_draws_have_the_stated_covariance() {
        let p = MuBetaPosterior { mu_mean: 1.0, mu_var: 2.0, beta_mean: -1.0, beta_var: 3.0, cov: -1.5 };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let d: Vec<(f64, f64)> = (0..n).map(|_| p.sample(&mut rng)).collect();
        let m0 = d.iter().map(|x| x.0).sum::<f64>() / n as f64;
        let m1 = d.iter().map(|x| x.1).sum::<f64>() / n as f64;
        let c = d.iter().map(|x| (x.0 - m0) * (x.1 - m1)).sum::<f64>() / n as f64;
        assert!((m0 - 1.0).abs() < 0.02 && (m1 + 1.0).abs() < 0.02);
        assert!((c + 1.5).abs() < 0.05);
    }

    #[test]
    fn zero_increment_is_rejected() {
        assert!(posterior_mu_beta(&[1.0], &[0.1], &[0.0], &MuBetaPriors::default()).is_err());
    }
}
