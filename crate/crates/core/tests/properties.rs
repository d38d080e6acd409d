use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sfharris::gig::{gig_sample, GigParams};
use sfharris::harris::{sample_at_times, simulate, Marginal, SfHarrisParams};
use sfharris::inference::{hpd_interval, ObservationSeries};
use sfharris::numerics::{bessel_k, log_bessel_k};
use sfharris::sv::spot::{change_points, collapse_runs};
use sfharris::sv::{deseasonalize, estimate_periodicity, reseasonalize, VolSeries};

fn vol_series(days: usize, cycle: usize, spot: &[f64]) -> VolSeries {
    let p = 26;
    let mut vs = VolSeries {
        times: vec![],
        durations: vec![],
        integrated: vec![],
        spot: vec![],
        counts: vec![],
        day: vec![],
        cycle_day: vec![],
        position: vec![],
        floored: vec![],
    };
    for d in 0..days {
        for k in 0..p {
            let dur = if k == p - 1 { 14.0 } else { 15.0 } / 390.0;
            vs.times.push(d as f64 + k as f64 * 15.0 / 390.0);
            vs.durations.push(dur);
            vs.spot.push(spot[(d * p + k) % spot.len()]);
            vs.counts.push(15);
            vs.day.push(d as i64);
            vs.cycle_day.push(d % cycle);
            vs.position.push(k);
        }
    }
    vs.integrated = vec![0.0; vs.spot.len()];
    vs.with_spot(vs.spot.clone())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bessel_is_even_in_order(nu in -20.0f64..20.0, x in 1e-3f64..200.0) {
        let a = log_bessel_k(nu, x).unwrap();
        let b = log_bessel_k(-nu, x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn bessel_recurrence(nu in -8.0f64..8.0, x in 0.05f64..50.0) {
        // K_{v+1} = K_{v-1} + (2v / x) K_v
        let lhs = bessel_k(nu + 1.0, x).unwrap();
        let rhs = bessel_k(nu - 1.0, x).unwrap() + 2.0 * nu / x * bessel_k(nu, x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs(), "{lhs} vs {rhs}");
    }

    #[test]
    fn gig_draws_are_positive(lambda in -5.0f64..5.0, kappa in 0.1f64..20.0, eta in 0.01f64..10.0, seed in any::<u64>()) {
        let p = GigParams::new(lambda, kappa, eta).unwrap();
        let xs = gig_sample(&p, 200, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(xs.iter().all(|x| x.is_finite() && *x > 0.0));
    }

    #[test]
    fn trajectory_is_well_formed(alpha in 0.1f64..10.0, horizon in 0.1f64..50.0, seed in any::<u64>()) {
        let m = Marginal::gig(GigParams::new(-1.0, 2.0, 1.0).unwrap()).unwrap();
        let p = SfHarrisParams::new(alpha, m).unwrap();
        let t = simulate(&p, horizon, &mut ChaCha8Rng::seed_from_u64(seed), 0.0).unwrap();
        prop_assert_eq!(t.jump_times.len(), t.states.len());
        prop_assert!(t.jump_times.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(t.jump_times.iter().all(|s| *s > t.origin && *s <= horizon));
        prop_assert!(t.start > 0.0 && t.states.iter().all(|x| *x > 0.0));
        // The path read just after each jump is the new state.
        let after: Vec<f64> = t.jump_times.iter().map(|s| (s + 1e-12).min(horizon)).collect();
        let got = sample_at_times(&t, &after).unwrap();
        for (g, s) in got.iter().zip(&t.states) {
            prop_assert_eq!(g, s);
        }
    }

    #[test]
    fn collapse_keeps_run_sums(spot in prop::collection::vec(0.0f64..1.0, 1..200), eps in 0.0f64..0.5) {
        let out = collapse_runs(&spot, eps);
        prop_assert_eq!(out.len(), spot.len());
        let (a, b): (f64, f64) = (spot.iter().sum(), out.iter().sum());
        prop_assert!((a - b).abs() < 1e-9);
        let lo = spot.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = spot.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(out.iter().all(|v| *v >= lo - 1e-12 && *v <= hi + 1e-12));
        prop_assert_eq!(collapse_runs(&spot, 0.0), spot);
    }

    #[test]
    fn change_points_partition(spot in prop::collection::vec(1e-5f64..1e-3, 1..150), penalty in 0.01f64..5.0) {
        let counts = vec![15usize; spot.len()];
        let ends = change_points(&spot, &counts, penalty);
        prop_assert!(!ends.is_empty());
        prop_assert_eq!(*ends.last().unwrap(), spot.len());
        prop_assert!(ends[0] > 0 && ends.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn periodicity_has_unit_day_means(
        spot in prop::collection::vec(0.1f64..10.0, 26..120),
        days in 1usize..15,
        cycle in 1usize..6,
    ) {
        let vs = vol_series(days, cycle, &spot);
        let f = estimate_periodicity(&vs, cycle).unwrap();
        for m in f.day_means() {
            prop_assert!((m - 1.0).abs() < 1e-10, "day mean {m}");
        }
        let back = reseasonalize(&deseasonalize(&vs, &f), &f);
        for (a, b) in back.spot.iter().zip(&vs.spot) {
            prop_assert!((a - b).abs() <= 1e-12 * b);
        }
    }

    #[test]
    fn hpd_holds_its_mass(xs in prop::collection::vec(-100.0f64..100.0, 100..400), p in 0.05f64..0.99) {
        let (lo, hi) = hpd_interval(&xs, p).unwrap();
        prop_assert!(lo <= hi);
        let inside = xs.iter().filter(|x| **x >= lo && **x <= hi).count();
        prop_assert!(inside >= (p * xs.len() as f64).ceil() as usize);
    }

    #[test]
    fn observations_need_increasing_times(mut times in prop::collection::vec(0.0f64..100.0, 2..50)) {
        times.sort_by(f64::total_cmp);
        let values = vec![1.0; times.len()];
        let strictly = times.windows(2).all(|w| w[0] < w[1]);
        prop_assert_eq!(ObservationSeries::new(times.clone(), values.clone()).is_ok(), strictly);
        times.reverse();
        prop_assert!(ObservationSeries::new(times, values).is_err());
    }
}
