use super::data::{MarginalFamily, ObservationSeries, QModel};
use super::InferenceError;
use crate::gig::{GigParams, GigSuffStats};
use crate::numerics::{bfgs, OptimizeOptions};

/// `log(1 - e^{-alpha t})`.
#[inline]
pub(crate) fn ln_jump_weight(alpha: f64, t: f64) -> f64 {
    (-(-alpha * t).exp_m1()).ln()
}

#[inline]
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + (-(a - b).abs()).exp().ln_1p()
}

/// Observed-data log-likelihood
/// `log Q(x_0) + sum_i log{(1 - e^{-alpha t_i}) Q(x_i) + e^{-alpha t_i} 1[x_i = x_{i-1}]}`.
///
/// For the GIG family `Q(x_i)` is a density while the repeat indicator acts
/// as an atom of unit weight; both enter additively as written.
pub fn loglik(obs: &ObservationSeries, alpha: f64, q: &QModel) -> f64 {
    if !(alpha > 0.0) {
        return f64::NEG_INFINITY;
    }
    let x = obs.values();
    let mut ll = q.ln_q(x[0]);
    for i in 1..x.len() {
        let t = obs.gap(i);
        let jump = ln_jump_weight(alpha, t) + q.ln_q(x[i]);
        ll += if obs.is_repeat(i) { log_add(jump, -alpha * t) } else { jump };
    }
    ll
}

/// Posterior probability `p_i` that `x_i` is a fresh draw from `Q`;
/// exactly one whenever `x_i != x_{i-1}`. Index 0 is the start and gets 1.
pub fn responsibilities(obs: &ObservationSeries, alpha: f64, q: &QModel) -> Vec<f64> {
    let x = obs.values();
    let mut p = Vec::with_capacity(x.len());
    p.push(1.0);
    for i in 1..x.len() {
        p.push(if obs.is_repeat(i) {
            let t = obs.gap(i);
            let jump = ln_jump_weight(alpha, t) + q.ln_q(x[i]);
            let stay = -alpha * t;
            (jump - log_add(jump, stay)).exp()
        } else {
            1.0
        });
    }
    p
}

/// Log-likelihood by explicit summation over every latent configuration.
/// Exponential in `n`; meant for cross-checks on short series.
pub fn loglik_by_enumeration(obs: &ObservationSeries, alpha: f64, q: &QModel) -> Result<f64, InferenceError> {
    let n = obs.n();
    if n > 20 {
        return Err(InferenceError::InvalidData("enumeration limited to n <= 20".into()));
    }
    let x = obs.values();
    let mut total = f64::NEG_INFINITY;
    for mask in 0u32..(1 << n) {
        let mut term = q.ln_q(x[0]);
        for i in 1..=n {
            let t = obs.gap(i);
            if mask & (1 << (i - 1)) != 0 {
                term += ln_jump_weight(alpha, t) + q.ln_q(x[i]);
            } else if obs.is_repeat(i) {
                term += -alpha * t;
            } else {
                term = f64::NEG_INFINITY;
                break;
            }
        }
        total = log_add(total, term);
    }
    Ok(total)
}

/// Unconstrained coordinates `(lambda, ln kappa, ln eta)`.
pub(crate) fn gig_from_theta(theta: &[f64]) -> Option<GigParams> {
    let p = GigParams {
        lambda: theta[0],
        kappa: theta[1].exp(),
        eta: theta[2].exp(),
    };
    (p.lambda.abs() <= 60.0 && p.kappa > 1e-10 && p.kappa < 1e8 && p.eta > 1e-12 && p.eta < 1e12).then_some(p)
}

pub(crate) fn theta_from_gig(p: &GigParams) -> [f64; 3] {
    [p.lambda, p.kappa.ln(), p.eta.ln()]
}

/// Maximizer of `eta` for fixed `(lambda, kappa)`.
pub(crate) fn profile_eta(s: &GigSuffStats, lambda: f64, kappa: f64) -> f64 {
    let b = s.m * lambda;
    (-b + (b * b + kappa * kappa * s.s2 * s.s3).sqrt()) / (kappa * s.s2)
}

/// Weighted GIG maximum likelihood: a coarse grid over `(lambda, kappa)`
/// with `eta` profiled out, then BFGS in unconstrained coordinates.
pub fn fit_gig(s: &GigSuffStats) -> Result<(GigParams, bool), InferenceError> {
    if !(s.m > 0.0) || !(s.s2 > 0.0) || !(s.s3 > 0.0) {
        return Err(InferenceError::InvalidData("GIG fit needs positive data".into()));
    }
    let mut best = (f64::NEG_INFINITY, GigParams { lambda: 0.0, kappa: 1.0, eta: 1.0 });
    for li in -12..=12 {
        let lambda = li as f64 * 0.5;
        for ki in 0..=24 {
            let kappa = 10f64.powf(-2.0 + ki as f64 * 0.2);
            let eta = profile_eta(s, lambda, kappa);
            if !(eta > 0.0) || !eta.is_finite() {
                continue;
            }
            let p = GigParams { lambda, kappa, eta };
            let ll = s.log_likelihood(&p);
            if ll > best.0 {
                best = (ll, p);
            }
        }
    }
    let start = theta_from_gig(&best.1);
    let objective = |th: &[f64]| match gig_from_theta(th) {
        Some(p) => -s.log_likelihood(&p),
        None => f64::INFINITY,
    };
    let r = bfgs(objective, &start, &OptimizeOptions::default())?;
    let p = gig_from_theta(&r.argmin).unwrap_or(best.1);
    Ok((p, r.converged))
}

/// Validates that the family fits the data.
pub(crate) fn check_family(obs: &ObservationSeries, family: &MarginalFamily) -> Result<(), InferenceError> {
    if matches!(family, MarginalFamily::Gig) && obs.values().iter().any(|v| !(*v > 0.0)) {
        return Err(InferenceError::InvalidData("GIG family needs positive observations".into()));
    }
    if obs.n() < 1 {
        return Err(InferenceError::InvalidData("need at least two observations".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> ObservationSeries {
        ObservationSeries::new(vec![0.0, 0.5, 1.2, 2.0], vec![1.3, 1.3, 0.4, 0.4]).unwrap()
    }

    #[test]
    fn single_transition() {
        let obs = ObservationSeries::new(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        let q = QModel::gig(GigParams::new(-2.0, 4.0, 1.0).unwrap()).unwrap();
        let expected = q.ln_q(1.0) + ((1.0 - (-0.7f64).exp()) * q.ln_q(2.0).exp()).ln();
        assert!((loglik(&obs, 0.7, &q) - expected).abs() < 1e-13);
    }

    #[test]
    fn enumeration_matches() {
        let q = QModel::gig(GigParams::new(0.5, 2.0, 1.0).unwrap()).unwrap();
        let obs = toy();
        for &a in &[0.1, 1.0, 7.0] {
            let d = loglik(&obs, a, &q) - loglik_by_enumeration(&obs, a, &q).unwrap();
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn responsibilities_are_one_off_repeats() {
        let q = QModel::gig(GigParams::new(0.5, 2.0, 1.0).unwrap()).unwrap();
        let p = responsibilities(&toy(), 1.0, &q);
        assert_eq!(p[0], 1.0);
        assert_eq!(p[2], 1.0);
        let w = 1.0 - (-0.5f64).exp();
        let qx = q.ln_q(1.3).exp();
        assert!((p[1] - w * qx / (w * qx + (-0.5f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn small_alpha_limit() {
        let q = QModel::Uniform { support: vec![1.0, 2.0] };
        let obs = ObservationSeries::new(vec![0.0, 1.0], vec![2.0, 2.0]).unwrap();
        let ll = loglik(&obs, 1e-12, &q);
        assert!((ll - q.ln_q(2.0)).abs() < 1e-9);
    }

    #[test]
    fn gig_fit_recovers_closed_form_optimum() {
        let mut s = GigSuffStats::default();
        for x in [0.3, 0.5, 0.8, 1.1, 1.7, 2.9, 0.9, 1.4] {
            s.push(x, 1.0);
        }
        let (p, _) = fit_gig(&s).unwrap();
        assert!((profile_eta(&s, p.lambda, p.kappa) - p.eta).abs() < 1e-4 * p.eta);
    }
}
