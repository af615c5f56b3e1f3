use coxpp::coxmodels::{sample_satellites, Coupling, SatelliteCoupling};
use coxpp::diagnostics::{
    compare_count_laws, count_tv_from_counts, rate_regression, wasserstein_lower_bound_paired,
    CountHistogram,
};
use coxpp::functional::lipschitz_family;
use coxpp::pointprocess::{planar_region_set, sample_ppp_window, spherical_region_set};
use coxpp::rng::replicates;
use coxpp::{ModelParams, RngStream, Window};
use proptest::prelude::*;
use rand::seq::SliceRandom;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tv_estimates_ignore_sample_order(seed in any::<u64>(), lambda in 0.5f64..6.0) {
        let w = Window::unit_square();
        let regions = planar_region_set(&w);
        let a = replicates(RngStream::new(seed, 1), 300, |_, rng| sample_ppp_window(&w, lambda, rng));
        let b = replicates(RngStream::new(seed, 2), 300, |_, rng| sample_ppp_window(&w, lambda, rng));
        let mut a2 = a.clone();
        a2.shuffle(&mut RngStream::new(seed, 3).rng());
        prop_assert_eq!(compare_count_laws(&a, &b, &regions), compare_count_laws(&a2, &b, &regions));
        for r in &regions {
            prop_assert_eq!(
                CountHistogram::from_samples(r, &a).tv_to_poisson(lambda * 0.0625),
                CountHistogram::from_samples(r, &a2).tv_to_poisson(lambda * 0.0625)
            );
        }
        let counts: Vec<usize> = a.iter().map(|c| c.len()).collect();
        let mut shuffled = counts.clone();
        shuffled.reverse();
        let x = count_tv_from_counts(&counts, "w", lambda, &mut RngStream::new(seed, 4).rng());
        let y = count_tv_from_counts(&shuffled, "w", lambda, &mut RngStream::new(seed, 4).rng());
        prop_assert_eq!(x.estimate, y.estimate);
    }

    #[test]
    fn regression_recovers_power_laws(a in 0.01f64..100.0, b in -3.0f64..1.0, x0 in 0.5f64..20.0) {
        let pts: Vec<(f64, f64)> = (0..6).map(|i| {
            let x = x0 * 1.7f64.powi(i);
            (x, a * x.powf(b))
        }).collect();
        let fit = rate_regression(&pts).unwrap();
        prop_assert!((fit.slope - b).abs() < 1e-9);
        prop_assert!((fit.intercept - a.ln()).abs() < 1e-8);
        prop_assert!(fit.r_squared > 1.0 - 1e-9);
    }
}

/// Two halves of one model's sample list have matching count laws.
#[test]
fn split_sample_self_tv_is_noise() {
    let params = ModelParams::satellites(2.0, 10).unwrap();
    let regions = spherical_region_set();
    let reps = 20_000;
    let all = replicates(RngStream::new(5, 0), 2 * reps, |_, rng| {
        sample_satellites(&params, rng).unwrap().points
    });
    let (a, b) = all.split_at(reps as usize);
    let res = compare_count_laws(a, b, &regions);
    assert!(res.iter().all(|r| r.passes()), "{res:?}");
}

/// The paired estimator is zero in law when the coupling never differs and
/// otherwise scales with the event probability.
#[test]
fn paired_bound_matches_direct_gap() {
    let params = ModelParams::satellites(2.0, 20).unwrap();
    let cpl = SatelliteCoupling::new(&params, 2.0).unwrap();
    let fam = lipschitz_family(&spherical_region_set(), 3, &[0.3]);
    let reps = 40_000;
    let paired = replicates(RngStream::new(6, 0), reps, |_, rng| {
        cpl.sample_differing(rng)
    });
    let cond = wasserstein_lower_bound_paired(&paired, cpl.prob_differ(), &fam).unwrap();
    let raw = replicates(RngStream::new(6, 1), reps, |_, rng| cpl.sample_pair(rng));
    let uncond = wasserstein_lower_bound_paired(&raw, 1.0, &fam).unwrap();
    // same functional family, same target quantity, different variance
    assert!(cond.stderr < uncond.stderr);
    assert!(
        (cond.estimate - uncond.estimate).abs() <= 3.0 * cond.stderr.hypot(uncond.stderr) + 1e-12
    );
}
