//! End-to-end acceptance checks. Each criterion prints one line and the
//! binary exits non-zero if any of them fails.
//!
//! `ACCEPTANCE_ONLY=2,5,9` restricts the run to a subset.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use sfharris::gig::{gig_cdf, gig_kl, gig_sample, GigDensity, GigParams, GigSampler, GigSuffStats};
use sfharris::harris::{
    integrate, sample_at_times, simulate, simulate_semi_markov, HoldingLaw, Marginal, SemiMarkovSpec, SfHarrisParams,
    Trajectory,
};
use sfharris::inference::{
    arms_update, draw_alpha_gamma, estimate_em, loglik, loglik_by_enumeration, AlphaConditional, Block, GigConditionals,
    MarginalFamily, ObservationSeries, Priors, QModel,
};
use sfharris::numerics::quad_integrate;
use sfharris::numerics::stats::{correlation, ks_one_sample, mean, variance};
use sfharris::simstudy::{run_process_study, run_sv_study, Method, ProcessFamily, StudyConfig};
use sfharris::sv::{
    clean_bars, compute_returns, detect_jumps, fit_sv, forecast_coverage, generate_bars, holdout_returns,
    posterior_mu_beta, split_by_days, u_shape, CoverageTarget, JumpConfig, MuBetaPriors, Session, SvConfig, SvParams,
    SyntheticConfig, TABLE_PROBS,
};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

type Check = fn() -> Outcome;

fn gig(lambda: f64, kappa: f64, eta: f64) -> GigParams {
    GigParams { lambda, kappa, eta }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard error of a sample mean.
fn se(v: &[f64]) -> f64 {
    (variance(v) / v.len() as f64).sqrt()
}

/// Correlation and its batch-means standard error.
fn batched_correlation(a: &[f64], b: &[f64], batches: usize) -> (f64, f64) {
    let size = a.len() / batches;
    let parts: Vec<f64> = (0..batches)
        .map(|k| correlation(&a[k * size..(k + 1) * size], &b[k * size..(k + 1) * size]))
        .collect();
    (correlation(a, b), (variance(&parts) / batches as f64).sqrt())
}

// 1 -------------------------------------------------------------------------

fn kl_table() -> Outcome {
    let truth = gig(0.0, 3.0, 4.0);
    let table = [
        (gig(3.5, 0.8, 0.6), 0.06),
        (gig(-1.0, 2.0, 10.0), 0.36),
        (gig(2.0, 10.0, 6.0), 2.48),
        (gig(7.0, 3.0, 4.0), 6.05),
        (gig(50.0, 20.0, 4.0), 49.75),
    ];
    let p = GigDensity::new(truth).unwrap();
    let mut pass = true;
    let mut worst_table: f64 = 0.0;
    let mut worst_quad: f64 = 0.0;
    for (q, expected) in table {
        let kl = gig_kl(&truth, &q).unwrap();
        let qd = GigDensity::new(q).unwrap();
        let oracle = quad_integrate(
            |x| {
                let lp = p.ln_pdf(x);
                if lp == f64::NEG_INFINITY {
                    0.0
                } else {
                    lp.exp() * (lp - qd.ln_pdf(x))
                }
            },
            0.0,
            f64::INFINITY,
            1e-10,
        )
        .unwrap()
        .value;
        worst_table = worst_table.max((kl - expected).abs());
        worst_quad = worst_quad.max((kl - oracle).abs());
        pass &= (kl - expected).abs() <= 0.01 && (kl - oracle).abs() <= 1e-4;
    }
    Outcome::new(pass, format!("max |KL - table| = {worst_table:.4}, max |KL - quadrature| = {worst_quad:.2e}"))
}

// 2 -------------------------------------------------------------------------

fn stationarity() -> Outcome {
    let q = gig(-2.0, 4.0, 1.0);
    let p = SfHarrisParams::new(3.0, Marginal::gig(q).unwrap()).unwrap();
    let times = [0.1, 1.0, 10.0];
    let mut r = rng(2);
    let mut cols = vec![Vec::with_capacity(10_000); times.len()];
    for _ in 0..10_000 {
        let traj = simulate(&p, 10.0, &mut r, 0.0).unwrap();
        for (c, v) in cols.iter_mut().zip(sample_at_times(&traj, &times).unwrap()) {
            c.push(v);
        }
    }
    let pvals: Vec<f64> = cols.iter().map(|c| ks_one_sample(c, |x| gig_cdf(&q, x).unwrap()).p_value).collect();
    let pass = pvals.iter().all(|p| *p >= 0.01);
    Outcome::new(pass, format!("KS p-values at t = 0.1, 1, 10: {:.3?}", pvals))
}

// 3 -------------------------------------------------------------------------

fn autocorrelation() -> Outcome {
    let q = gig(-2.0, 4.0, 1.0);
    let lags = [0.1, 0.5, 1.0];
    let n = 100_000;
    let mut r = rng(3);
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for alpha in [0.5, 3.0] {
        let p = SfHarrisParams::new(alpha, Marginal::gig(q).unwrap()).unwrap();
        let mut h0 = Vec::with_capacity(n);
        let mut hs = vec![Vec::with_capacity(n); lags.len()];
        for _ in 0..n {
            let traj = simulate(&p, 1.0, &mut r, 0.0).unwrap();
            let v = sample_at_times(&traj, &[0.0, 0.1, 0.5, 1.0]).unwrap();
            h0.push(v[0]);
            for (k, col) in hs.iter_mut().enumerate() {
                col.push(v[k + 1]);
            }
        }
        for (h, col) in lags.iter().zip(&hs) {
            let (rho, s) = batched_correlation(&h0, col, 100);
            let z = (rho - (-alpha * h).exp()).abs() / s;
            worst = worst.max(z);
            pass &= z <= 3.0;
        }
    }
    let law = HoldingLaw::Lomax { shape: 1.5, scale: 1.0 };
    let spec = SemiMarkovSpec { holding_law: law, marginal: Marginal::gig(q).unwrap() };
    let mut h0 = Vec::with_capacity(n);
    let mut hs = vec![Vec::with_capacity(n); lags.len()];
    for _ in 0..n {
        let traj = simulate_semi_markov(&spec, 1.0, &mut r).unwrap().trajectory;
        let v = sample_at_times(&traj, &[0.0, 0.1, 0.5, 1.0]).unwrap();
        h0.push(v[0]);
        for (k, col) in hs.iter_mut().enumerate() {
            col.push(v[k + 1]);
        }
    }
    let mut worst_sm: f64 = 0.0;
    for (h, col) in lags.iter().zip(&hs) {
        let (rho, s) = batched_correlation(&h0, col, 100);
        let z = (rho - (1.0 - law.cdf(*h))).abs() / s;
        worst_sm = worst_sm.max(z);
        pass &= z <= 3.0;
    }
    Outcome::new(pass, format!("max |z| Markov {worst:.2}, semi-Markov Lomax(1.5) {worst_sm:.2}"))
}

// 4 -------------------------------------------------------------------------

/// Midpoint Riemann sum of a skeleton on `points` cells over `[origin, horizon]`.
fn riemann(traj: &Trajectory, points: usize) -> f64 {
    let h = (traj.horizon - traj.origin) / points as f64;
    let mut k = 0;
    let mut sum = 0.0;
    for i in 0..points {
        let t = traj.origin + (i as f64 + 0.5) * h;
        while k < traj.jump_times.len() && traj.jump_times[k] <= t {
            k += 1;
        }
        sum += if k == 0 { traj.start } else { traj.states[k - 1] };
    }
    sum * h
}

fn integrated_oracle() -> Outcome {
    let mut r = rng(4);
    let horizon = 1.0;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let alpha = r.random_range(0.5..3.0);
        let q = gig(r.random_range(-2.0..2.0), r.random_range(1.0..5.0), r.random_range(0.5..2.0));
        let p = SfHarrisParams::new(alpha, Marginal::gig(q).unwrap()).unwrap();
        let traj = simulate(&p, horizon, &mut r, 0.0).unwrap();
        let max_y = traj.states.iter().chain([&traj.start]).fold(0.0f64, |m, y| m.max(y.abs()));
        let err = (integrate(&traj, horizon).unwrap() - riemann(&traj, 1_000_000)).abs();
        worst = worst.max(err / (1e-6 * horizon * max_y));
    }
    Outcome::new(worst <= 1.0, format!("max error / (1e-6 T max|Y|) = {worst:.3}"))
}

// 5 -------------------------------------------------------------------------

/// CDF of an unnormalized log density, tabulated by the trapezoid rule on
/// a fine grid in `u`, where `x = map(u)`.
struct NumericCdf {
    u: Vec<f64>,
    cdf: Vec<f64>,
}

impl NumericCdf {
    fn new(ln_density_u: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Self {
        let coarse = 20_000;
        let step = (hi - lo) / coarse as f64;
        let vals: Vec<f64> = (0..=coarse).map(|i| ln_density_u(lo + i as f64 * step)).collect();
        let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let first = vals.iter().position(|v| *v > top - 60.0).unwrap();
        let last = vals.iter().rposition(|v| *v > top - 60.0).unwrap();
        let a = lo + first.saturating_sub(1) as f64 * step;
        let b = lo + (last + 1).min(coarse) as f64 * step;
        let fine = 400_000;
        let h = (b - a) / fine as f64;
        let u: Vec<f64> = (0..=fine).map(|i| a + i as f64 * h).collect();
        let dens: Vec<f64> = u.iter().map(|x| (ln_density_u(*x) - top).exp()).collect();
        let mut cdf = vec![0.0; u.len()];
        for i in 1..u.len() {
            cdf[i] = cdf[i - 1] + 0.5 * h * (dens[i - 1] + dens[i]);
        }
        let total = *cdf.last().unwrap();
        cdf.iter_mut().for_each(|c| *c /= total);
        Self { u, cdf }
    }

    fn at(&self, u: f64) -> f64 {
        if u <= self.u[0] {
            return 0.0;
        }
        if u >= *self.u.last().unwrap() {
            return 1.0;
        }
        let i = self.u.partition_point(|v| *v <= u);
        let w = (u - self.u[i - 1]) / (self.u[i] - self.u[i - 1]);
        self.cdf[i - 1] + w * (self.cdf[i] - self.cdf[i - 1])
    }
}

/// Chained ARMS draws, one kept out of `thin`.
fn arms_draws<F: Fn(f64) -> f64>(f: &F, block: Block, q: &[f64], start: f64, n: usize, thin: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let mut cur = start;
    let mut out = Vec::with_capacity(n);
    for i in 0..n * thin {
        cur = arms_update(f, block, q, cur, &mut r, "block").unwrap();
        if (i + 1) % thin == 0 {
            out.push(cur);
        }
    }
    out
}

fn gibbs_blocks() -> Outcome {
    let mut r = rng(5);
    let mut pass = true;
    let mut parts = Vec::new();

    for (m, j_m, c) in [(12usize, 3.5, 1.0), (250, 40.0, 0.5)] {
        let draws: Vec<f64> = (0..100_000).map(|_| draw_alpha_gamma(m, j_m, c, &mut r)).collect();
        let shape = m as f64 + 1.0;
        let rate = j_m + c;
        let (mu, var) = (shape / rate, shape / (rate * rate));
        let z_mean = (mean(&draws) - mu).abs() / (var / draws.len() as f64).sqrt();
        let se_var = var * ((2.0 + 6.0 / shape) / draws.len() as f64).sqrt();
        let z_var = (variance(&draws) - var).abs() / se_var;
        pass &= z_mean <= 3.0 && z_var <= 3.0;
        parts.push(format!("Gamma(m={m}) z_mean {z_mean:.2} z_var {z_var:.2}"));
    }

    let truth = gig(-1.0, 3.0, 1.5);
    let xs = gig_sample(&truth, 200, &mut r).unwrap();
    let cond = GigConditionals { stats: GigSuffStats::from_values(xs.iter().copied()), priors: Priors::default() };
    let z = [-1.6449, -0.6745, 0.0, 0.6745, 1.6449];
    let normal_q: Vec<f64> = z.iter().map(|v| 2.0 * v).collect();
    let gamma_q: Vec<f64> = [0.05f64, 0.25, 0.5, 0.75, 0.95].iter().map(|p| -(1.0 - p).ln()).collect();
    let (l0, k0, e0) = (truth.lambda, truth.kappa, truth.eta);

    let mut ks = |name: &str, lnf: &dyn Fn(f64) -> f64, block: Block, q: &[f64], start: f64, seed: u64| {
        let draws = arms_draws(&lnf, block, q, start, 2000, 10, seed);
        let p = match block {
            Block::Interval(lo, hi) => {
                let cdf = NumericCdf::new(lnf, lo, hi);
                ks_one_sample(&draws, |x| cdf.at(x)).p_value
            }
            Block::Positive => {
                let cdf = NumericCdf::new(|u| lnf(u.exp()) + u, -30.0, 10.0);
                let logs: Vec<f64> = draws.iter().map(|x| x.ln()).collect();
                ks_one_sample(&logs, |u| cdf.at(u)).p_value
            }
        };
        pass &= p >= 0.05;
        parts.push(format!("{name} KS p {p:.3}"));
    };
    ks("lambda", &|l| cond.ln_lambda(l, k0, e0), Block::Interval(-60.0, 60.0), &normal_q, l0, 51);
    ks("kappa", &|k| cond.ln_kappa(l0, k, e0), Block::Positive, &gamma_q, k0, 52);
    ks("eta", &|e| cond.ln_eta(l0, k0, e), Block::Positive, &gamma_q, e0, 53);

    let p = SfHarrisParams::new(2.0, Marginal::gig(truth).unwrap()).unwrap();
    let traj = simulate(&p, 100.0, &mut r, 0.0).unwrap();
    let times: Vec<f64> = (0..=400).map(|i| i as f64 * 0.25).collect();
    let obs = ObservationSeries::new(times.clone(), sample_at_times(&traj, &times).unwrap()).unwrap();
    let gaps = obs.gaps();
    let zs: Vec<bool> = (1..=obs.n()).map(|i| !obs.is_repeat(i)).collect();
    let ac = AlphaConditional::new(&gaps, &zs, 1.0);
    ks("alpha", &|a| ac.ln_density(a), Block::Positive, &gamma_q, 2.0, 54);

    Outcome::new(pass, parts.join(", "))
}

// 6 -------------------------------------------------------------------------

fn em_and_enumeration() -> Outcome {
    let mut r = rng(6);
    let mut worst_drop: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..50 {
        let alpha = r.random_range(0.5..5.0);
        let q = gig(r.random_range(-2.0..2.0), r.random_range(1.0..6.0), r.random_range(0.5..2.0));
        let p = SfHarrisParams::new(alpha, Marginal::gig(q).unwrap()).unwrap();
        let traj = simulate(&p, 40.0, &mut r, 0.0).unwrap();
        let times: Vec<f64> = (0..=200).map(|i| i as f64 * 0.2).collect();
        let obs = ObservationSeries::new(times.clone(), sample_at_times(&traj, &times).unwrap()).unwrap();
        match estimate_em(&obs, &MarginalFamily::Gig, None, 1e-10, 300) {
            Ok(trace) => {
                for w in trace.loglik_path.windows(2) {
                    worst_drop = worst_drop.max(w[0] - w[1]);
                }
            }
            Err(_) => failures += 1,
        }
    }

    let mut worst_enum: f64 = 0.0;
    for n in 1..=10usize {
        for rep in 0..5 {
            let times: Vec<f64> = (0..=n)
                .scan(0.0, |t, i| {
                    if i > 0 {
                        *t += r.random_range(0.2..1.5);
                    }
                    Some(*t)
                })
                .collect();
            let alpha = r.random_range(0.2..4.0);
            let (values, q) = if rep % 2 == 0 {
                let support = vec![1.0, 2.0, 3.0];
                let v = (0..=n).map(|_| support[r.random_range(0..3)]).collect::<Vec<_>>();
                (v, QModel::Uniform { support })
            } else {
                let g = gig(0.5, 2.0, 1.0);
                let mut v = gig_sample(&g, n + 1, &mut r).unwrap();
                for i in 1..v.len() {
                    if r.random::<f64>() < 0.4 {
                        v[i] = v[i - 1];
                    }
                }
                (v, QModel::gig(g).unwrap())
            };
            let obs = ObservationSeries::new(times, values).unwrap();
            let d = (loglik(&obs, alpha, &q) - loglik_by_enumeration(&obs, alpha, &q).unwrap()).abs();
            worst_enum = worst_enum.max(d);
        }
    }
    let pass = failures == 0 && worst_drop <= 1e-8 && worst_enum <= 1e-10;
    Outcome::new(
        pass,
        format!("EM failures {failures}, largest log-likelihood drop {worst_drop:.2e}, max enumeration gap {worst_enum:.2e}"),
    )
}

// 7, 8 ----------------------------------------------------------------------

fn study_value(report: &sfharris::simstudy::ErrorReport, m: Method, n: usize, metric: &str) -> f64 {
    report.get(m, n, metric).map_or(f64::NAN, |r| r.value)
}

fn table_uniform() -> Outcome {
    let cfg = StudyConfig {
        replications: 20,
        sample_sizes: vec![1000],
        methods: vec![Method::Ndnj, Method::GibbsA],
        seed: 7,
        ..Default::default()
    };
    let rep = run_process_study(&cfg, ProcessFamily::Uniform5).unwrap();
    let ga = study_value(&rep, Method::GibbsA, 1000, "E_alpha");
    let nd = study_value(&rep, Method::Ndnj, 1000, "E_alpha");
    Outcome::new(ga <= 0.05 && (0.10..=0.35).contains(&nd), format!("Gibbs-a E_alpha {ga:.4}, NDNJ E_alpha {nd:.4}"))
}

fn table_gig() -> Outcome {
    let cfg = StudyConfig {
        replications: 20,
        sample_sizes: vec![1000],
        methods: vec![Method::Ndnj, Method::GibbsB],
        seed: 8,
        ..Default::default()
    };
    let rep = run_process_study(&cfg, ProcessFamily::Gig).unwrap();
    let na = study_value(&rep, Method::Ndnj, 1000, "E_alpha");
    let nq = study_value(&rep, Method::Ndnj, 1000, "E_Q");
    let gb = study_value(&rep, Method::GibbsB, 1000, "E_alpha");
    Outcome::new(
        na <= 0.25 && nq <= 0.05 && gb <= 0.25,
        format!("NDNJ E_alpha {na:.4}, NDNJ E_Q {nq:.4}, Gibbs-b E_alpha {gb:.4}"),
    )
}

// 9 -------------------------------------------------------------------------

/// `int_a^b f(s) ds` for the test weight functions.
fn weight_integral(smooth: bool, a: f64, b: f64) -> f64 {
    if smooth {
        let w = 2.0 * std::f64::consts::PI;
        let g = |t: f64| t - 0.5 * (w * t).cos() / w;
        g(b) - g(a)
    } else {
        let g = |t: f64| if t <= 0.5 { 0.5 * t } else { 0.25 + 1.5 * (t - 0.5) };
        g(b) - g(a)
    }
}

fn weight(smooth: bool, t: f64) -> f64 {
    if smooth {
        1.0 + 0.5 * (2.0 * std::f64::consts::PI * t).sin()
    } else if t <= 0.5 {
        0.5
    } else {
        1.5
    }
}

fn ratio_identities() -> Outcome {
    let q = gig(-2.0, 4.0, 1.0);
    let sampler = GigSampler::new(q).unwrap();
    let mut r = rng(9);
    let mut parts = Vec::new();
    let mut pass = true;

    for a in [vec![1.0, 1.0, 1.0], vec![1.0, 2.0, 0.5]] {
        let total: f64 = a.iter().sum();
        let mut ratios = vec![Vec::with_capacity(1_000_000); a.len()];
        for _ in 0..1_000_000 {
            let x: Vec<f64> = a.iter().map(|_| sampler.sample(&mut r)).collect();
            let s: f64 = a.iter().zip(&x).map(|(w, v)| w * v).sum();
            for (col, v) in ratios.iter_mut().zip(&x) {
                col.push(v / s);
            }
        }
        let zs: Vec<f64> = ratios.iter().map(|c| (mean(c) - 1.0 / total) / se(c)).collect();
        pass &= zs.iter().all(|z| z.abs() <= 3.0);
        parts.push(format!("weights {a:?}: z {:.1?}", zs));
    }

    let p = SfHarrisParams::new(3.0, Marginal::gig(q).unwrap()).unwrap();
    let probe = [0.25, 0.75];
    let n = 100_000;
    let mut cols = [vec![Vec::with_capacity(n); 2], vec![Vec::with_capacity(n); 2]];
    for _ in 0..n {
        let traj = simulate(&p, 1.0, &mut r, 0.0).unwrap();
        let ys = sample_at_times(&traj, &probe).unwrap();
        let mut edges = vec![0.0];
        edges.extend(&traj.jump_times);
        edges.push(1.0);
        let mut vals = vec![traj.start];
        vals.extend(&traj.states);
        for (k, smooth) in [false, true].into_iter().enumerate() {
            let int: f64 = vals.iter().enumerate().map(|(i, y)| y * weight_integral(smooth, edges[i], edges[i + 1])).sum();
            for (j, t) in probe.iter().enumerate() {
                cols[k][j].push(weight(smooth, *t) * ys[j] / int);
            }
        }
    }
    for (k, name) in ["step", "smooth"].iter().enumerate() {
        let zs: Vec<f64> = probe
            .iter()
            .enumerate()
            .map(|(j, t)| (mean(&cols[k][j]) - weight(k == 1, *t)) / se(&cols[k][j]))
            .collect();
        pass &= zs.iter().all(|z| z.abs() <= 3.0);
        parts.push(format!("{name} f at t = 0.25, 0.75: z {:.1?}", zs));
    }
    Outcome::new(pass, parts.join("; "))
}

// 10 ------------------------------------------------------------------------

/// Posterior moments of `(mu, beta)` on a dense grid. The box is located
/// by a coarse pass over the prior support, then refined.
fn grid_posterior(h: &[f64], ret: &[f64], hs: &[f64], pr: &MuBetaPriors) -> [f64; 4] {
    let lp = |mu: f64, beta: f64| {
        let mut s = -(mu - pr.mu_mean).powi(2) / (2.0 * pr.mu_var) - (beta - pr.beta_mean).powi(2) / (2.0 * pr.beta_var);
        for i in 0..h.len() {
            s -= (ret[i] - mu * h[i] - beta * hs[i]).powi(2) / (2.0 * hs[i]);
        }
        s
    };
    let moments = |c: (f64, f64), half: (f64, f64), k: usize| {
        let (mut z, mut m1, mut m2, mut s1, mut s2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        let mut cells = Vec::with_capacity((k + 1) * (k + 1));
        let mut top = f64::NEG_INFINITY;
        for i in 0..=k {
            let mu = c.0 - half.0 + 2.0 * half.0 * i as f64 / k as f64;
            for j in 0..=k {
                let beta = c.1 - half.1 + 2.0 * half.1 * j as f64 / k as f64;
                let v = lp(mu, beta);
                top = top.max(v);
                cells.push((mu, beta, v));
            }
        }
        for (mu, beta, v) in cells {
            let w = (v - top).exp();
            z += w;
            m1 += w * mu;
            s1 += w * beta;
            m2 += w * mu * mu;
            s2 += w * beta * beta;
        }
        let (mm, bm) = (m1 / z, s1 / z);
        [mm, m2 / z - mm * mm, bm, s2 / z - bm * bm]
    };
    let coarse = moments((pr.mu_mean, pr.beta_mean), (8.0 * pr.mu_var.sqrt(), 8.0 * pr.beta_var.sqrt()), 1200);
    moments((coarse[0], coarse[2]), (10.0 * coarse[1].sqrt(), 10.0 * coarse[3].sqrt()), 1500)
}

fn mu_beta_posterior() -> Outcome {
    let mut r = rng(10);
    let mut worst: f64 = 0.0;
    for n in 1..=5usize {
        for _ in 0..3 {
            let h: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
            let hs: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
            let ret: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let pr = MuBetaPriors { mu_mean: r.random_range(-1.0..1.0), mu_var: 4.0, beta_mean: 0.0, beta_var: 9.0 };
            let post = posterior_mu_beta(&h, &ret, &hs, &pr).unwrap();
            let g = grid_posterior(&h, &ret, &hs, &pr);
            for (a, b) in [post.mu_mean, post.mu_var, post.beta_mean, post.beta_var].iter().zip(g) {
                worst = worst.max((a - b).abs());
            }
        }
    }

    let n = 10_000;
    let (mut mu_in, mut beta_in) = (0, 0);
    let std = Normal::new(0.0, 1.0).unwrap();
    for _ in 0..100 {
        let (mu, beta) = (r.random_range(-2.0..2.0), r.random_range(-2.0..2.0));
        let h = vec![1.0 / 390.0; n];
        let hs: Vec<f64> = (0..n).map(|_| h[0] * r.random_range(0.2..3.0)).collect();
        let ret: Vec<f64> = (0..n).map(|i| mu * h[i] + beta * hs[i] + hs[i].sqrt() * std.sample(&mut r)).collect();
        let post = posterior_mu_beta(&h, &ret, &hs, &MuBetaPriors::default()).unwrap();
        mu_in += usize::from((post.mu_mean - mu).abs() <= 3.0 * post.mu_var.sqrt());
        beta_in += usize::from((post.beta_mean - beta).abs() <= 3.0 * post.beta_var.sqrt());
    }
    Outcome::new(
        worst <= 1e-3 && mu_in >= 90 && beta_in >= 90,
        format!("max grid gap {worst:.2e}; truth within 3 SD: mu {mu_in}/100, beta {beta_in}/100"),
    )
}

// 11 ------------------------------------------------------------------------

fn synthetic_year(mu: f64, beta: f64, alpha: f64) -> SyntheticConfig {
    SyntheticConfig {
        days: 252,
        params: SvParams { mu, beta, alpha, gig: gig(-1.0, 2.0, 1e-4) },
        intraday: Some(u_shape(390, 0.5)),
        jumps: 40,
        jump_sigmas: 10.0,
        ..Default::default()
    }
}

fn jump_detection() -> Outcome {
    let mut r = rng(11);
    let data = generate_bars(&synthetic_year(0.0, 0.0, 1.0), &mut r).unwrap();
    let cleaned = clean_bars(&data.bars, &Session::default());
    let rs = compute_returns(&cleaned.bars, &data.axis, 1, 5).unwrap();
    let found = detect_jumps(&rs, &JumpConfig::default()).unwrap().indices();
    let hit = data.jump_returns.iter().filter(|j| found.binary_search(j).is_ok()).count();
    Outcome::new(hit >= 34, format!("{hit}/40 injected jumps detected, {} windows flagged", found.len()))
}

// 12 ------------------------------------------------------------------------

fn forecast_table() -> Outcome {
    let mut r = rng(12);
    let data = generate_bars(&synthetic_year(0.02, -1.0, 2.0), &mut r).unwrap();
    let (est, hold) = split_by_days(&data.bars, 0.8);
    let fit = fit_sv(&est, &SvConfig::default(), &mut r).unwrap();
    let hr = holdout_returns(&fit, &hold).unwrap();
    let table = forecast_coverage(&fit, &hr, &TABLE_PROBS, 1000, CoverageTarget::Returns, &mut r).unwrap();
    let pass = table.rows.iter().all(|row| (row.coverage - row.p).abs() <= 0.05);
    let cells: Vec<String> = table.rows.iter().map(|row| format!("{:.0}:{:.1}", row.p * 100.0, row.coverage * 100.0)).collect();
    Outcome::new(pass, format!("nominal:coverage % {}", cells.join(" ")))
}

// 13 ------------------------------------------------------------------------

fn sv_study() -> Outcome {
    let cfg = StudyConfig { replications: 20, seed: 13, ..Default::default() };
    let days = cfg.sv.days;
    let rep = run_sv_study(&cfg).unwrap();
    let v = |m| study_value(&rep, Method::GibbsB, days, m);
    let (mu, beta, alpha, q) = (v("E_mu"), v("E_beta"), v("E_alpha"), v("E_Q"));
    let failures = rep.raw.iter().filter(|r| r.failure.is_some()).count();
    Outcome::new(
        mu <= 0.25 && beta <= 0.15 && alpha <= 0.30 && q <= 0.30,
        format!("E_mu {mu:.3}, E_beta {beta:.3}, E_alpha {alpha:.3}, E_Q {q:.3} ({failures} failed fits)"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check, u64); 13] = [
        ("GIG KL divergence", kl_table, 60),
        ("stationarity", stationarity, 60),
        ("autocorrelation", autocorrelation, 300),
        ("integrated process", integrated_oracle, 60),
        ("Gibbs conditionals", gibbs_blocks, 300),
        ("EM monotonicity and enumeration", em_and_enumeration, 300),
        ("uniform-marginal study", table_uniform, 1800),
        ("GIG-marginal study", table_gig, 7200),
        ("ratio identities", ratio_identities, 120),
        ("drift and risk-premium posterior", mu_beta_posterior, 600),
        ("jump detection", jump_detection, 300),
        ("forecast coverage", forecast_table, 3600),
        ("volatility study", sv_study, 14400),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|v| v.trim().parse().ok()).collect());
    let mut failed = Vec::new();
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let t0 = Instant::now();
        let out = check();
        let took = t0.elapsed();
        let in_time = took <= Duration::from_secs(*budget);
        let pass = out.pass && in_time;
        let budget_note = if in_time { String::new() } else { format!(", over the {budget} s budget") };
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.1} s{budget_note}]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64()
        );
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
