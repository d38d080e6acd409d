//! End-to-end runs of the volatility pipeline and the process estimators.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sfharris::gig::GigParams;
use sfharris::harris::{sample_at_times, simulate, Marginal, SfHarrisParams};
use sfharris::inference::{gibbs, GibbsConfig, GibbsVariant, MarginalFamily, ObservationSeries, Priors};
use sfharris::sv::{
    fit_sv, forecast_coverage, generate_bars, holdout_returns, split_by_days, u_shape, CoverageTarget, SvConfig, SvParams,
    SyntheticConfig,
};

fn synthetic(seed: u64) -> SyntheticConfig {
    SyntheticConfig {
        days: 60,
        params: SvParams { mu: 0.0, beta: 0.0, alpha: 3.0, gig: GigParams { lambda: -1.0, kappa: 2.0, eta: 1e-4 } },
        intraday: Some(u_shape(390, 0.5)),
        jumps: 4,
        start_price: 50.0 + seed as f64,
        ..SyntheticConfig::default()
    }
}

fn quick_config() -> SvConfig {
    SvConfig { gibbs: GibbsConfig { iters: 800, burn_in: 200, ..GibbsConfig::default() }, ..SvConfig::default() }
}

#[test]
fn fit_and_forecast_synthetic_bars() {
    let data = generate_bars(&synthetic(1), &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(data.bars.len(), 60 * 390);
    let (train, test) = split_by_days(&data.bars, 0.8);
    assert_eq!(train.len(), 48 * 390);

    let fit = fit_sv(&train, &quick_config(), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let removed = fit.jumps.as_ref().map_or(0, |j| j.indices().len());
    // The stored returns are those left after jump removal.
    assert_eq!(fit.returns.len() + removed, 48 * 389);
    assert!(removed >= 3, "injected jumps removed: {removed}");
    assert!(fit.params.alpha > 0.0 && fit.params.gig.eta > 0.0);
    assert!(fit.adjusted.spot.iter().all(|v| *v > 0.0));
    // The factors recover the U shape: the open is busier than midday.
    let f = fit.periodicity.as_ref().unwrap();
    assert!(f.factor(0, 0) > 1.2 * f.factor(0, 13), "{:?}", f.factors[0]);

    let holdout = holdout_returns(&fit, &test).unwrap();
    let table =
        forecast_coverage(&fit, &holdout, &[0.5, 0.9, 0.99], 400, CoverageTarget::Returns, &mut ChaCha8Rng::seed_from_u64(3))
            .unwrap();
    let cov: Vec<f64> = table.rows.iter().map(|r| r.coverage).collect();
    assert!(cov.windows(2).all(|w| w[0] <= w[1]), "{cov:?}");
    assert!(cov[2] > 0.8, "{cov:?}");
}

#[test]
fn pipeline_is_deterministic() {
    let data = generate_bars(&SyntheticConfig { days: 15, ..synthetic(2) }, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let cfg = SvConfig { gibbs: GibbsConfig { iters: 600, burn_in: 100, ..GibbsConfig::default() }, ..SvConfig::default() };
    let a = fit_sv(&data.bars, &cfg, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
    let b = fit_sv(&data.bars, &cfg, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(a.chains.alpha, b.chains.alpha);
    assert_eq!(a.adjusted.spot, b.adjusted.spot);
}

#[test]
fn gibbs_chains_repeat_under_a_seed() {
    let p = SfHarrisParams::new(2.0, Marginal::gig(GigParams::new(-2.0, 4.0, 1.0).unwrap()).unwrap()).unwrap();
    let traj = simulate(&p, 50.0, &mut ChaCha8Rng::seed_from_u64(7), 0.0).unwrap();
    let times: Vec<f64> = (0..250).map(|i| 0.2 * i as f64).collect();
    let obs = ObservationSeries::new(times.clone(), sample_at_times(&traj, &times).unwrap()).unwrap();
    let cfg = GibbsConfig { iters: 300, burn_in: 50, ..GibbsConfig::default() };
    for variant in [GibbsVariant::A, GibbsVariant::B] {
        let run = |s| gibbs(&obs, &Priors::default(), &MarginalFamily::Gig, variant, &cfg, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
        let (x, y, z) = (run(8), run(8), run(9));
        assert_eq!(x.alpha, y.alpha);
        assert_ne!(x.alpha, z.alpha);
        assert_eq!(x.alpha.len(), 250);
    }
}
