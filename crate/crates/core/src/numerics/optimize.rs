//! Derivative-free Nelder-Mead and finite-difference BFGS minimizers.
//!
//! Both minimize; maximize by negating the objective. Non-finite objective
//! values are treated as `+inf` so that infeasible regions repel the search.

use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    pub xtol: f64,
    pub ftol: f64,
    pub gtol: f64,
    pub max_iter: usize,
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            xtol: 1e-8,
            ftol: 1e-8,
            gtol: 1e-6,
            max_iter: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerResult {
    pub argmin: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when a line search failed at a kink (one-sided slopes disagree).
    pub nonsmooth: bool,
    /// Number of steepest-descent fallback steps BFGS had to take.
    pub fallback_steps: usize,
    pub evaluations: usize,
}

fn eval<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], count: &mut usize) -> f64 {
    *count += 1;
    let v = f(x);
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Nelder-Mead simplex search with standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
///
/// Stops once the spread of objective values is below `ftol` and the simplex
/// diameter is below `xtol` (relative to the best vertex), or immediately on
/// an exactly flat simplex. Restarts from the best vertex guard against a
/// collapsed simplex.
pub fn nelder_mead<F>(f: F, start: &[f64], opts: &OptimizeOptions) -> Result<OptimizerResult, NumericsError>
where
    F: Fn(&[f64]) -> f64,
{
    let d = start.len();
    if d == 0 {
        return Err(NumericsError::Domain("empty starting point".into()));
    }
    let mut evaluations = 0;
    let f0 = eval(&f, start, &mut evaluations);
    if !f0.is_finite() {
        return Err(NumericsError::NonFiniteStart);
    }

    let mut best = start.to_vec();
    let mut best_f = f0;
    let mut iterations = 0;
    let mut converged = false;
    const RESTARTS: usize = 3;

    for round in 0..=RESTARTS {
        let (x, fx, it, conv) = nm_round(&f, &best, best_f, opts, opts.max_iter - iterations, &mut evaluations);
        iterations += it;
        let improvement = best_f - fx;
        if fx <= best_f {
            best = x;
            best_f = fx;
        }
        converged = conv;
        if !conv || iterations >= opts.max_iter {
            break;
        }
        if round > 0 && improvement.abs() <= opts.ftol * (1.0 + best_f.abs()) {
            break;
        }
    }
    Ok(OptimizerResult {
        argmin: best,
        value: best_f,
        iterations,
        converged,
        nonsmooth: false,
        fallback_steps: 0,
        evaluations,
    })
}

fn nm_round<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    f_start: f64,
    opts: &OptimizeOptions,
    budget: usize,
    evaluations: &mut usize,
) -> (Vec<f64>, f64, usize, bool) {
    let d = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    let mut values: Vec<f64> = Vec::with_capacity(d + 1);
    simplex.push(start.to_vec());
    values.push(f_start);
    for i in 0..d {
        let mut v = start.to_vec();
        let step = if v[i] != 0.0 { 0.05 * v[i].abs().max(0.1) } else { 0.00025 };
        v[i] += step;
        values.push(eval(f, &v, evaluations));
        simplex.push(v);
    }

    let mut order: Vec<usize> = (0..=d).collect();
    let mut it = 0;
    loop {
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let b = order[0];
        let w = order[d];
        let spread = values[w] - values[b];
        let diameter = simplex
            .iter()
            .map(|v| v.iter().zip(&simplex[b]).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let flat = spread.is_finite() && spread <= opts.ftol;
        if spread == 0.0 || flat && diameter <= opts.xtol * (1.0 + norm_inf(&simplex[b])) {
            return (simplex[b].clone(), values[b], it, true);
        }
        if it >= budget {
            return (simplex[b].clone(), values[b], it, false);
        }
        it += 1;

        let mut centroid = vec![0.0; d];
        for &k in &order[..d] {
            for (c, x) in centroid.iter_mut().zip(&simplex[k]) {
                *c += x / d as f64;
            }
        }
        let along = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[w])
                .map(|(c, x)| c + coef * (c - x))
                .collect()
        };
        let xr = along(1.0);
        let fr = eval(f, &xr, evaluations);
        let second_worst = values[order[d - 1]];
        if fr < values[b] {
            let xe = along(2.0);
            let fe = eval(f, &xe, evaluations);
            if fe < fr {
                simplex[w] = xe;
                values[w] = fe;
            } else {
                simplex[w] = xr;
                values[w] = fr;
            }
            continue;
        }
        if fr < second_worst {
            simplex[w] = xr;
            values[w] = fr;
            continue;
        }
        let (xc, fc, accept) = if fr < values[w] {
            let xc = along(0.5);
            let fc = eval(f, &xc, evaluations);
            (xc, fc, fc <= fr)
        } else {
            let xc = along(-0.5);
            let fc = eval(f, &xc, evaluations);
            (xc, fc, fc < values[w])
        };
        if accept {
            simplex[w] = xc;
            values[w] = fc;
            continue;
        }
        let anchor = simplex[b].clone();
        for &k in &order[1..] {
            for (x, a) in simplex[k].iter_mut().zip(&anchor) {
                *x = a + 0.5 * (*x - a);
            }
            values[k] = eval(f, &simplex[k], evaluations);
        }
    }
}

fn fd_step(x: f64) -> f64 {
    1e-7 * (1.0 + x.abs())
}

fn forward_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], fx: f64, count: &mut usize) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = fd_step(x[i]);
            probe[i] = x[i] + h;
            let g = (eval(f, &probe, count) - fx) / h;
            probe[i] = x[i];
            g
        })
        .collect()
}

fn backward_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], fx: f64, count: &mut usize) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = fd_step(x[i]);
            probe[i] = x[i] - h;
            let g = (fx - eval(f, &probe, count)) / h;
            probe[i] = x[i];
            g
        })
        .collect()
}

fn central_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], count: &mut usize) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = fd_step(x[i]).sqrt() * 1e-2;
            probe[i] = x[i] + h;
            let up = eval(f, &probe, count);
            probe[i] = x[i] - h;
            let down = eval(f, &probe, count);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Armijo backtracking along `dir`. Returns the accepted point and value.
fn backtrack<F: Fn(&[f64]) -> f64>(
    f: &F,
    x: &[f64],
    fx: f64,
    g: &[f64],
    dir: &[f64],
    count: &mut usize,
) -> Option<(Vec<f64>, f64)> {
    let slope = dot(g, dir);
    if !(slope < 0.0) {
        return None;
    }
    let mut t = 1.0;
    for _ in 0..60 {
        let trial: Vec<f64> = x.iter().zip(dir).map(|(a, d)| a + t * d).collect();
        let ft = eval(f, &trial, count);
        if ft.is_finite() && ft <= fx + 1e-4 * t * slope {
            return Some((trial, ft));
        }
        t *= 0.5;
    }
    None
}

/// Quasi-Newton BFGS with finite-difference gradients and Armijo backtracking.
///
/// Gradients use forward differences with step `1e-7 (1 + |x_i|)`. Once the
/// forward gradient is small the search switches to central differences to
/// polish the last digits. A failed line search falls back to a
/// steepest-descent step; if that fails too the search stops and reports
/// whether the point looks like a kink.
pub fn bfgs<F>(f: F, start: &[f64], opts: &OptimizeOptions) -> Result<OptimizerResult, NumericsError>
where
    F: Fn(&[f64]) -> f64,
{
    let d = start.len();
    if d == 0 {
        return Err(NumericsError::Domain("empty starting point".into()));
    }
    let mut evaluations = 0;
    let mut x = start.to_vec();
    let mut fx = eval(&f, &x, &mut evaluations);
    if !fx.is_finite() {
        return Err(NumericsError::NonFiniteStart);
    }
    let identity = |n: usize| -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
    };
    let mut hinv = identity(d);
    let mut central = false;
    let mut g = forward_gradient(&f, &x, fx, &mut evaluations);
    let mut iterations = 0;
    let mut fallback_steps = 0;
    let mut nonsmooth = false;
    let mut converged = false;
    let mut last_step = f64::INFINITY;

    while iterations < opts.max_iter {
        let gn = norm_inf(&g);
        if !central && gn < opts.gtol.max(1e-3 * opts.gtol.sqrt()) {
            central = true;
            g = central_gradient(&f, &x, &mut evaluations);
            continue;
        }
        if central && norm_inf(&g) < opts.gtol && last_step <= opts.xtol * (1.0 + norm_inf(&x)) {
            converged = true;
            break;
        }
        iterations += 1;

        let mut dir: Vec<f64> = hinv.iter().map(|row| -dot(row, &g)).collect();
        if !(dot(&dir, &g) < 0.0) {
            hinv = identity(d);
            dir = g.iter().map(|v| -v).collect();
        }
        let step = match backtrack(&f, &x, fx, &g, &dir, &mut evaluations) {
            Some(s) => Some(s),
            None => {
                let sd: Vec<f64> = g.iter().map(|v| -v).collect();
                let s = backtrack(&f, &x, fx, &g, &sd, &mut evaluations);
                if s.is_some() {
                    fallback_steps += 1;
                    hinv = identity(d);
                }
                s
            }
        };
        let Some((x_new, f_new)) = step else {
            let gc = central_gradient(&f, &x, &mut evaluations);
            let gf = forward_gradient(&f, &x, fx, &mut evaluations);
            let gb = backward_gradient(&f, &x, fx, &mut evaluations);
            let kink = gf.iter().zip(&gb).any(|(a, b)| (a - b).abs() > 1e-4 * (1.0 + a.abs().max(b.abs())));
            if kink {
                nonsmooth = true;
            } else if norm_inf(&gc) < opts.gtol.sqrt() {
                converged = true;
            }
            break;
        };

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        last_step = norm_inf(&s);
        let g_new = if central {
            central_gradient(&f, &x_new, &mut evaluations)
        } else {
            forward_gradient(&f, &x_new, f_new, &mut evaluations)
        };
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm_inf(&s) * norm_inf(&y) && sy > 0.0 {
            let hy: Vec<f64> = hinv.iter().map(|row| dot(row, &y)).collect();
            let yhy = dot(&y, &hy);
            let rho = 1.0 / sy;
            for i in 0..d {
                for j in 0..d {
                    hinv[i][j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
        let df = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if df.abs() <= f64::EPSILON * fx.abs() && last_step <= opts.xtol * (1.0 + norm_inf(&x)) {
            converged = central || norm_inf(&g) < opts.gtol;
            if converged {
                break;
            }
        }
    }

    Ok(OptimizerResult {
        argmin: x,
        value: fx,
        iterations,
        converged,
        nonsmooth,
        fallback_steps,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn nm_quadratic() {
        let r = nelder_mead(|x| (x[0] - 3.0).powi(2), &[0.0], &OptimizeOptions::default()).unwrap();
        assert!((r.argmin[0] - 3.0).abs() < 1e-6, "{:?}", r);
        assert!(r.converged);
    }

    #[test]
    fn nm_rosenbrock() {
        let r = nelder_mead(rosenbrock, &[-1.2, 1.0], &OptimizeOptions::default()).unwrap();
        assert!((r.argmin[0] - 1.0).abs() < 1e-4 && (r.argmin[1] - 1.0).abs() < 1e-4, "{:?}", r);
        assert_eq!(r.value, rosenbrock(&r.argmin));
    }

    #[test]
    fn nm_constant_objective_returns_start() {
        let r = nelder_mead(|_| 4.0, &[1.5, -2.0], &OptimizeOptions::default()).unwrap();
        assert_eq!(r.argmin, vec![1.5, -2.0]);
        assert!(r.converged);
    }

    #[test]
    fn non_finite_start_is_rejected() {
        let r = nelder_mead(|_| f64::NAN, &[0.0], &OptimizeOptions::default());
        assert_eq!(r.unwrap_err(), NumericsError::NonFiniteStart);
        assert!(bfgs(|_| f64::INFINITY, &[0.0], &OptimizeOptions::default()).is_err());
    }

    #[test]
    fn bfgs_sphere() {
        let r = bfgs(|x| x.iter().map(|v| v * v).sum(), &[1.0, 1.0, 1.0], &OptimizeOptions::default()).unwrap();
        assert!(r.argmin.iter().all(|v| v.abs() < 1e-8), "{:?}", r);
        assert!(r.converged);
    }

    #[test]
    fn bfgs_rosenbrock() {
        let r = bfgs(rosenbrock, &[-1.2, 1.0], &OptimizeOptions::default()).unwrap();
        assert!((r.argmin[0] - 1.0).abs() < 1e-4 && (r.argmin[1] - 1.0).abs() < 1e-4, "{:?}", r);
    }

    #[test]
    fn bfgs_kink_flagged() {
        let r = bfgs(|x| x[0].abs(), &[0.0], &OptimizeOptions::default()).unwrap();
        assert_eq!(r.argmin, vec![0.0]);
        assert!(r.nonsmooth);
    }

    #[test]
    fn deterministic() {
        let a = bfgs(rosenbrock, &[-1.2, 1.0], &OptimizeOptions::default()).unwrap();
        let b = bfgs(rosenbrock, &[-1.2, 1.0], &OptimizeOptions::default()).unwrap();
        assert_eq!(a, b);
        let a = nelder_mead(rosenbrock, &[-1.2, 1.0], &OptimizeOptions::default()).unwrap();
        let b = nelder_mead(rosenbrock, &[-1.2, 1.0], &OptimizeOptions::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn iteration_cap_respected() {
        let opts = OptimizeOptions { max_iter: 5, ..Default::default() };
        let r = nelder_mead(rosenbrock, &[-1.2, 1.0], &opts).unwrap();
        assert!(r.iterations <= 5);
        assert!(!r.converged);
        let r = bfgs(rosenbrock, &[-1.2, 1.0], &opts).unwrap();
        assert!(r.iterations <= 5);
    }
}
