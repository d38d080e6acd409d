use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sfharris::gig::{gig_sample, GigParams};
use sfharris::harris::{sample_at_times, simulate, Marginal, SfHarrisParams};
use sfharris::inference::{gibbs, GibbsConfig, GibbsVariant, MarginalFamily, ObservationSeries, Priors};
use sfharris::numerics::bessel::log_bessel_k;
use sfharris::sv::spot::change_points;

fn bessel(c: &mut Criterion) {
    c.bench_function("log_bessel_k grid", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for i in 0..20 {
                for j in 1..=20 {
                    acc += log_bessel_k(-5.0 + 0.5 * i as f64, 0.05 * j as f64 * j as f64).unwrap();
                }
            }
            std::hint::black_box(acc)
        })
    });
}

fn gig(c: &mut Criterion) {
    let p = GigParams::new(-2.0, 4.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    c.bench_function("gig_sample 10k", |b| b.iter(|| gig_sample(&p, 10_000, &mut rng).unwrap()));
}

fn harris_params() -> SfHarrisParams {
    SfHarrisParams::new(3.0, Marginal::gig(GigParams::new(-2.0, 4.0, 1.0).unwrap()).unwrap()).unwrap()
}

fn simulate_path(c: &mut Criterion) {
    let p = harris_params();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    c.bench_function("simulate horizon 1000", |b| b.iter(|| simulate(&p, 1000.0, &mut rng, 0.0).unwrap()));
}

fn gibbs_sweeps(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let traj = simulate(&harris_params(), 200.0, &mut rng, 0.0).unwrap();
    let times: Vec<f64> = (0..1000).map(|i| 0.2 * i as f64).collect();
    let values = sample_at_times(&traj, &times).unwrap();
    let obs = ObservationSeries::new(times, values).unwrap();
    let cfg = GibbsConfig { iters: 60, burn_in: 10, ..GibbsConfig::default() };
    let priors = Priors::default();
    let mut group = c.benchmark_group("gibbs 60 sweeps n=1000");
    group.sample_size(10);
    for (name, variant) in [("a", GibbsVariant::A), ("b", GibbsVariant::B)] {
        group.bench_function(name, |b| {
            b.iter_batched(
                || ChaCha8Rng::seed_from_u64(4),
                |mut r| gibbs(&obs, &priors, &MarginalFamily::Gig, variant, &cfg, &mut r).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn pelt(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let spot: Vec<f64> = (0..5000)
        .map(|i| {
            let level = if (i / 250) % 2 == 0 { 1e-4 } else { 4e-4 };
            level * rng.random_range(0.5..1.5)
        })
        .collect();
    let counts = vec![30usize; spot.len()];
    c.bench_function("change_points n=5000", |b| b.iter(|| change_points(&spot, &counts, 0.6)));
}

criterion_group!(kernels, bessel, gig, simulate_path, gibbs_sweeps, pelt);
criterion_main!(kernels);
