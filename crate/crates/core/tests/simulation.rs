use expfunc::levy::{LevyMeasureSpec, LevyTriplet};
use expfunc::sim::verify_fixed_point_scaled;
use expfunc::{
    empirical_laplace, simulate_functional, support_consistency, support_of_functional, verify_fixed_point, SimConfig,
    SupportResult,
};

fn dufresne() -> (LevyTriplet, LevyTriplet) {
    (LevyTriplet::brownian_with_drift(1.0, 2f64.sqrt()).unwrap(), LevyTriplet::deterministic(1.0))
}

#[test]
fn halving_the_step_stays_within_noise() {
    let (xi, eta) = dufresne();
    let a = simulate_functional(&xi, &eta, &SimConfig::new(30.0, 1e-2, 10_000, 5).unwrap()).unwrap();
    let b = simulate_functional(&xi, &eta, &SimConfig::new(30.0, 5e-3, 10_000, 5).unwrap()).unwrap();
    let (la, sa) = empirical_laplace(&a, 1.0).unwrap();
    let (lb, sb) = empirical_laplace(&b, 1.0).unwrap();
    assert!((la - lb).abs() < 3.0 * (sa * sa + sb * sb).sqrt(), "{la} vs {lb}");
}

#[test]
fn truncation_bound_covers_longer_horizon() {
    // a > σ²/2, so the remainder has a finite mean
    let xi = LevyTriplet::brownian_with_drift(1.0, 1.0).unwrap();
    let eta = LevyTriplet::deterministic(1.0);
    let short = simulate_functional(&xi, &eta, &SimConfig::new(5.0, 1e-2, 2000, 9).unwrap()).unwrap();
    let long = simulate_functional(&xi, &eta, &SimConfig::new(10.0, 1e-2, 2000, 9).unwrap()).unwrap();
    let shift = long.values.iter().zip(&short.values).map(|(l, s)| l - s).sum::<f64>() / 2000.0;
    assert!(shift >= 0.0 && shift <= short.truncation_bound, "{shift} vs {}", short.truncation_bound);
    // the same streams drive both horizons
    assert!(long.values.iter().zip(&short.values).all(|(l, s)| l >= s));
}

#[test]
fn dufresne_fixed_point_passes_and_control_fails() {
    let (xi, eta) = dufresne();
    let cfg = SimConfig::new(30.0, 1e-2, 10_000, 11).unwrap();
    let r = verify_fixed_point(&xi, &eta, &cfg, 1.0).unwrap();
    assert!(r.passed, "{r:?}");
    let r = verify_fixed_point_scaled(&xi, &eta, &cfg, 1.0, 2.0).unwrap();
    assert!(!r.passed, "{r:?}");
}

#[test]
fn point_support_spread_shrinks_with_step() {
    let t = LevyTriplet::deterministic(1.0);
    let s = simulate_functional(&t, &t, &SimConfig::new(40.0, 0.5, 10, 1).unwrap()).unwrap();
    let r = support_consistency(&s, &SupportResult::point(1.0));
    assert_eq!(r.fraction_outside, 0.0);
    assert!((r.max_sample - 1.0).abs() < 1e-12);
}

#[test]
fn subordinator_eta_gives_non_negative_samples() {
    let xi = LevyTriplet::finite_variation(2.0, LevyMeasureSpec::atoms(&[(-0.5, 1.0)]).unwrap()).unwrap();
    let eta = LevyTriplet::subordinator(1.0, LevyMeasureSpec::atoms(&[(1.0, 1.0)]).unwrap()).unwrap();
    let s = simulate_functional(&xi, &eta, &SimConfig::new(30.0, 1e-2, 2000, 3).unwrap()).unwrap();
    let claimed = support_of_functional(&xi, &eta).unwrap();
    let r = support_consistency(&s, &claimed);
    assert!(r.min_sample >= 0.5 - 1e-2, "{r:?}");
    assert_eq!(r.fraction_outside, 0.0);
}
