use serde::{Deserialize, Serialize};

use super::data::{MarginalFamily, ObservationSeries, QModel};
use super::likelihood::{check_family, fit_gig, gig_from_theta, ln_jump_weight, loglik, responsibilities, theta_from_gig};
use super::InferenceError;
use crate::gig::{GigParams, GigSuffStats};
use crate::numerics::{nelder_mead, OptimizeOptions};

/// Upper cap on the jump rate where the likelihood pushes it to infinity.
pub const ALPHA_MAX: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub alpha: f64,
    /// GIG parameters; `None` for the uniform family or when no fit was possible.
    pub gig: Option<GigParams>,
    pub loglik: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Free-form notes about degenerate situations.
    pub flags: Vec<String>,
}

/// No-difference-no-jump estimator.
///
/// Treats every change of value as exactly one jump and every repeat as none.
/// The jump rate is the reciprocal of the mean time between changes,
/// `|J| / (t̂_{last change} - t̂_0)`; `Q` is fitted by maximum likelihood to
/// the values right after a change.
pub fn estimate_ndnj(obs: &ObservationSeries, family: &MarginalFamily) -> Result<Estimate, InferenceError> {
    check_family(obs, family)?;
    let changes: Vec<usize> = (1..=obs.n()).filter(|&i| !obs.is_repeat(i)).collect();
    let mut flags = Vec::new();
    let alpha = match changes.last() {
        None => {
            flags.push("no value changes: alpha = 0 and Q not fitted".to_string());
            0.0
        }
        Some(&last) => changes.len() as f64 / (obs.times()[last] - obs.times()[0]),
    };
    let mut converged = true;
    let gig = match family {
        MarginalFamily::Gig if changes.len() >= 2 => {
            let s = GigSuffStats::from_values(changes.iter().map(|&i| obs.values()[i]));
            match fit_gig(&s) {
                Ok((p, c)) => {
                    converged = c;
                    Some(p)
                }
                Err(e) => {
                    flags.push(format!("Q fit failed: {e}"));
                    None
                }
            }
        }
        MarginalFamily::Gig => {
            if !changes.is_empty() {
                flags.push("fewer than two changes: Q not fitted".into());
            }
            None
        }
        MarginalFamily::DiscreteUniform { .. } => None,
    };
    Ok(Estimate {
        alpha,
        gig,
        loglik: None,
        converged,
        iterations: 0,
        flags,
    })
}

fn default_start(obs: &ObservationSeries, family: &MarginalFamily) -> Result<(f64, Option<GigParams>), InferenceError> {
    let nd = estimate_ndnj(obs, family)?;
    let alpha = if nd.alpha > 0.0 { nd.alpha } else { 1.0 };
    let gig = match family {
        MarginalFamily::Gig => Some(match nd.gig {
            Some(p) => p,
            None => fit_gig(&GigSuffStats::from_values(obs.values().iter().copied()))
                .map(|r| r.0)
                .unwrap_or(GigParams { lambda: 0.0, kappa: 1.0, eta: 1.0 }),
        }),
        MarginalFamily::DiscreteUniform { .. } => None,
    };
    Ok((alpha, gig))
}

/// Maximum likelihood by Nelder-Mead over `(ln alpha, lambda, ln kappa, ln eta)`.
/// Without `start` the search begins at the NDNJ estimate.
pub fn estimate_mle(
    obs: &ObservationSeries,
    family: &MarginalFamily,
    start: Option<(f64, Option<GigParams>)>,
) -> Result<Estimate, InferenceError> {
    check_family(obs, family)?;
    let (a0, g0) = match start {
        Some(s) => s,
        None => default_start(obs, family)?,
    };
    let opts = OptimizeOptions {
        max_iter: 4000,
        ..Default::default()
    };
    match family {
        MarginalFamily::Gig => {
            let g0 = g0.ok_or_else(|| InferenceError::InvalidData("GIG start needs parameters".into()))?;
            let th = theta_from_gig(&g0);
            let x0 = [a0.ln(), th[0], th[1], th[2]];
            let obj = |v: &[f64]| {
                let alpha = v[0].exp();
                if alpha > ALPHA_MAX {
                    return f64::INFINITY;
                }
                match gig_from_theta(&v[1..]).and_then(|p| QModel::gig(p).ok()) {
                    Some(q) => -loglik(obs, alpha, &q),
                    None => f64::INFINITY,
                }
            };
            let r = nelder_mead(obj, &x0, &opts)?;
            let gig = gig_from_theta(&r.argmin[1..]);
            Ok(Estimate {
                alpha: r.argmin[0].exp(),
                gig,
                loglik: Some(-r.value),
                converged: r.converged,
                iterations: r.iterations,
                flags: Vec::new(),
            })
        }
        MarginalFamily::DiscreteUniform { .. } => {
            let q = QModel::for_family(family, obs, None)?;
            let obj = |v: &[f64]| {
                let alpha = v[0].exp();
                if alpha > ALPHA_MAX {
                    f64::INFINITY
                } else {
                    -loglik(obs, alpha, &q)
                }
            };
            let r = nelder_mead(obj, &[a0.ln()], &opts)?;
            Ok(Estimate {
                alpha: r.argmin[0].exp(),
                gig: None,
                loglik: Some(-r.value),
                converged: r.converged,
                iterations: r.iterations,
                flags: Vec::new(),
            })
        }
    }
}

/// Maximizer of `sum_i p_i log(1 - e^{-a t_i}) - a sum_i (1 - p_i) t_i`.
///
/// The objective is concave in `a`, so the root of its decreasing score is
/// bracketed and bisected on the log scale.
pub(crate) fn em_alpha_step(obs: &ObservationSeries, p: &[f64]) -> f64 {
    let stay_time: f64 = (1..=obs.n()).map(|i| (1.0 - p[i]) * obs.gap(i)).sum();
    let jumps: f64 = p[1..].iter().sum();
    if jumps <= 0.0 {
        return 1.0 / ALPHA_MAX;
    }
    if stay_time <= 0.0 {
        return ALPHA_MAX;
    }
    let score = |a: f64| -> f64 {
        let mut s = -stay_time;
        for i in 1..=obs.n() {
            if p[i] > 0.0 {
                let t = obs.gap(i);
                s += p[i] * t / (a * t).exp_m1();
            }
        }
        s
    };
    let (mut lo, mut hi) = (1e-12f64, ALPHA_MAX);
    if score(hi) > 0.0 {
        return ALPHA_MAX;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if score(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-13 {
            break;
        }
    }
    (lo * hi).sqrt()
}

fn em_objective(obs: &ObservationSeries, p: &[f64], alpha: f64, gig: Option<&GigParams>, q: &QModel) -> f64 {
    let mut g = 0.0;
    for i in 1..=obs.n() {
        let t = obs.gap(i);
        if p[i] > 0.0 {
            g += p[i] * ln_jump_weight(alpha, t);
        }
        g -= (1.0 - p[i]) * alpha * t;
    }
    match (gig, q) {
        (Some(par), _) => {
            let mut s = GigSuffStats::default();
            for (x, w) in obs.values().iter().zip(p) {
                s.push(*x, *w);
            }
            g + s.log_likelihood(par)
        }
        (None, q) => g + obs.values().iter().zip(p).map(|(x, w)| w * q.ln_q(*x)).sum::<f64>(),
    }
}

/// Per-iteration record of an EM run.
#[derive(Debug, Clone, PartialEq)]
pub struct EmTrace {
    pub estimate: Estimate,
    /// Observed log-likelihood at the start and after every iteration.
    pub loglik_path: Vec<f64>,
}

/// Expectation-maximization on the latent fresh-draw indicators.
///
/// The E-step computes `p_i`; the M-step maximizes the expected augmented
/// log-likelihood, separately in `alpha` (one-dimensional concave problem)
/// and in the GIG parameters (weighted MLE by BFGS). Iteration stops once the
/// observed log-likelihood improves by less than `tol`.
pub fn estimate_em(
    obs: &ObservationSeries,
    family: &MarginalFamily,
    start: Option<(f64, Option<GigParams>)>,
    tol: f64,
    max_iter: usize,
) -> Result<EmTrace, InferenceError> {
    check_family(obs, family)?;
    let (mut alpha, mut gig) = match start {
        Some(s) => s,
        None => default_start(obs, family)?,
    };
    let mut q = QModel::for_family(family, obs, gig)?;
    let mut ll = loglik(obs, alpha, &q);
    let mut path = vec![ll];
    let mut flags = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let p = responsibilities(obs, alpha, &q);
        let g_old = em_objective(obs, &p, alpha, gig.as_ref(), &q);
        let alpha_new = em_alpha_step(obs, &p);
        let gig_new = match (family, gig) {
            (MarginalFamily::Gig, Some(old)) => {
                let mut s = GigSuffStats::default();
                for (x, w) in obs.values().iter().zip(&p) {
                    s.push(*x, *w);
                }
                let cand = fit_gig(&s).map(|r| r.0).unwrap_or(old);
                Some(if s.log_likelihood(&cand) >= s.log_likelihood(&old) { cand } else { old })
            }
            _ => None,
        };

        let q_new = QModel::for_family(family, obs, gig_new)?;
        let g_new = em_objective(obs, &p, alpha_new, gig_new.as_ref(), &q_new);
        if g_new < g_old - 1e-9 * g_old.abs().max(1.0) {
            flags.push(format!("M-step decreased the surrogate at iteration {iterations}"));
        }
        let (mut a_try, mut g_try, mut q_try) = (alpha_new, gig_new, q_new);
        let mut ll_try = loglik(obs, a_try, &q_try);
        let mut halvings = 0;
        while !(ll_try >= ll) && halvings < 3 {
            halvings += 1;
            a_try = (0.5 * (a_try.ln() + alpha.ln())).exp();
            g_try = match (g_try, gig) {
                (Some(a), Some(b)) => {
                    let ta = theta_from_gig(&a);
                    let tb = theta_from_gig(&b);
                    gig_from_theta(&[0.5 * (ta[0] + tb[0]), 0.5 * (ta[1] + tb[1]), 0.5 * (ta[2] + tb[2])])
                }
                _ => None,
            };
            q_try = QModel::for_family(family, obs, g_try)?;
            ll_try = loglik(obs, a_try, &q_try);
        }
        if !(ll_try >= ll) {
            flags.push(format!("M-step failed to improve the likelihood at iteration {iterations}"));
            break;
        }
        let gain = ll_try - ll;
        alpha = a_try;
        gig = g_try;
        q = q_try;
        ll = ll_try;
        path.push(ll);
        if gain < tol {
            converged = true;
            break;
        }
    }
    if alpha >= ALPHA_MAX * 0.999 {
        flags.push("alpha reached its upper cap".into());
    }
    Ok(EmTrace {
        estimate: Estimate {
            alpha,
            gig,
            loglik: Some(ll),
            converged,
            iterations,
            flags,
        },
        loglik_path: path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ndnj_constant_series() {
        let obs = ObservationSeries::equally_spaced(0.0, 1.0, vec![2.0; 10]).unwrap();
        let e = estimate_ndnj(&obs, &MarginalFamily::Gig).unwrap();
        assert_eq!(e.alpha, 0.0);
        assert!(e.gig.is_none());
    }

    #[test]
    fn ndnj_alternating_unit_gaps() {
        let vals: Vec<f64> = (0..11).map(|i| if i % 2 == 0 { 1.0 } else { 2.0 }).collect();
        let obs = ObservationSeries::equally_spaced(0.0, 1.0, vals).unwrap();
        let e = estimate_ndnj(&obs, &MarginalFamily::DiscreteUniform { support: None }).unwrap();
        assert!((e.alpha - 1.0).abs() < 1e-15);
    }

    #[test]
    fn em_alpha_step_closed_form_when_unit_gaps() {
        // all t_i = 1: score zero at 1 - e^{-a} = sum p / n
        let obs = ObservationSeries::equally_spaced(0.0, 1.0, vec![1.0, 1.0, 2.0, 2.0, 3.0]).unwrap();
        let p = [1.0, 0.3, 1.0, 0.6, 1.0];
        let a = em_alpha_step(&obs, &p);
        let frac: f64 = p[1..].iter().sum::<f64>() / 4.0;
        assert!((a - (-(1.0 - frac).ln())).abs() < 1e-10);
    }

    #[test]
    fn em_is_monotone_on_toy_series() {
        let obs = ObservationSeries::new(vec![0.0, 0.4, 1.0, 1.3, 2.1, 2.2], vec![0.8, 0.8, 1.9, 1.9, 0.5, 0.7]).unwrap();
        let tr = estimate_em(&obs, &MarginalFamily::Gig, None, 1e-10, 200).unwrap();
        assert!(tr.loglik_path.windows(2).all(|w| w[1] >= w[0] - 1e-8));
    }
}
