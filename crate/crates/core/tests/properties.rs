use expfunc::bm::{ode_residual, psi_x_from_v, riccati_eta_from_x};
use expfunc::levy::{DensityShape, LaplaceExponent, LevyMeasureSpec, LevyTriplet, Side};
use expfunc::support::SupportKind;
use expfunc::{
    eval_laplace_exponent, is_bernstein, simulate_functional, stable_preimage, support_of_functional,
    BernsteinOptions, BmDriftParams, Decision, SimConfig, StableConvolutionSpec,
};
use proptest::prelude::*;

fn subordinator() -> impl Strategy<Value = LevyTriplet> {
    let drift = 0.0..3.0f64;
    let part = prop_oneof![
        (0.05..3.0f64, 0.1..5.0f64).prop_map(|(p, m)| LevyMeasureSpec::atoms(&[(p, m)]).unwrap()),
        (0.05..0.95f64, 0.1..3.0f64).prop_map(|(a, c)| LevyMeasureSpec::stable(a, c, Side::Positive).unwrap()),
        (0.1..3.0f64, 0.2..4.0f64).prop_map(|(s, r)| {
            LevyMeasureSpec::density(s, DensityShape::ExpPoly { power: 0.0, rate: r }, Side::Positive).unwrap()
        }),
        Just(LevyMeasureSpec::Zero),
    ];
    (drift, part).prop_map(|(b, m)| LevyTriplet::subordinator(b, m).unwrap())
}

fn process() -> impl Strategy<Value = LevyTriplet> {
    let atoms = prop::collection::vec((prop_oneof![-2.0..-0.1f64, 0.1..2.0f64], 0.1..2.0f64), 0..3);
    prop_oneof![
        (-2.0..3.0f64, atoms).prop_map(|(b, a)| {
            let m = if a.is_empty() { LevyMeasureSpec::Zero } else { LevyMeasureSpec::atoms(&a).unwrap() };
            LevyTriplet::finite_variation(b, m).unwrap()
        }),
        (-1.0..2.0f64, 0.1..2.0f64).prop_map(|(a, s)| LevyTriplet::brownian_with_drift(a, s).unwrap()),
        subordinator(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn stable_exponent_is_homogeneous(alpha in 0.05..0.95f64, c in 0.1..3.0f64, u in 0.01..50.0f64, lam in 0.1..10.0f64) {
        let t = LevyTriplet::subordinator(0.0, LevyMeasureSpec::stable(alpha, c, Side::Positive).unwrap()).unwrap();
        let a = eval_laplace_exponent(&t, lam * u).unwrap();
        let b = lam.powf(alpha) * eval_laplace_exponent(&t, u).unwrap();
        prop_assert!((a - b).abs() <= 1e-10 * b.abs());
    }

    #[test]
    fn minus_psi_is_bernstein(t in subordinator()) {
        let psi = LaplaceExponent::from_triplet(&t).unwrap();
        let v = is_bernstein(&|u| psi.eval(u).map(|x| -x), &BernsteinOptions::default()).unwrap();
        prop_assert_ne!(v.decision, Decision::Reject, "{:?}", v.violation);
    }

    #[test]
    fn support_is_well_formed(xi in process(), eta in process()) {
        let drifts = matches!(xi.mean().unwrap(), Some(m) if m > 0.0);
        match support_of_functional(&xi, &eta) {
            Ok(s) => {
                prop_assert!(drifts);
                match s.kind {
                    SupportKind::Point => prop_assert!(s.lower == s.upper && s.lower.is_finite()),
                    SupportKind::ClosedBoundedInterval => prop_assert!(s.lower < s.upper && s.upper.is_finite()),
                    SupportKind::RightHalfLine => prop_assert!(s.lower.is_finite() && s.upper == f64::INFINITY),
                    SupportKind::LeftHalfLine => prop_assert!(s.upper.is_finite() && s.lower == f64::NEG_INFINITY),
                    SupportKind::FullLine => prop_assert!(s.lower == f64::NEG_INFINITY && s.upper == f64::INFINITY),
                }
                if eta.is_subordinator().unwrap() {
                    prop_assert!(s.lower >= 0.0);
                }
            }
            Err(e) => prop_assert!(!drifts, "{e}"),
        }
    }

    #[test]
    fn psi_x_dominates_psi_v(alpha in 0.05..0.95f64, c in 0.1..3.0f64, b in 0.0..2.0f64, u in 0.01..100.0f64) {
        let psi_v = LaplaceExponent::stable(alpha, c, b).unwrap();
        let x = psi_x_from_v(&psi_v, u).unwrap();
        prop_assert!(x >= psi_v.eval(u).unwrap() - 1e-12);
    }

    #[test]
    fn riccati_agrees_with_ode(alpha in 0.05..0.45f64, c in 0.2..2.0f64, sigma in 0.5..1.5f64, u in 0.05..20.0f64) {
        // a large enough that the preimage exists
        let a = sigma * sigma;
        let p = BmDriftParams::new(a, sigma).unwrap();
        let psi_v = StableConvolutionSpec::single(alpha, c).unwrap().laplace_exponent();
        let eta = LaplaceExponent::from_triplet(&stable_preimage(alpha, c, a, sigma).unwrap()).unwrap();
        let lv = |v: f64| {
            let (x, x1, x2) = psi_v.eval_with_derivs(v)?;
            let l = x.exp();
            Ok((l, x1 * l, (x2 + x1 * x1) * l))
        };
        let r = ode_residual(&lv, &eta, &p, u).unwrap();
        prop_assert!(r.abs() <= 1e-8 * (1.0 + eta.eval(u).unwrap().abs()));
        // ψ_X = αψ_V for a stable law
        let psi_x = StableConvolutionSpec::single(alpha, c * alpha).unwrap().laplace_exponent();
        let via_riccati = riccati_eta_from_x(&psi_x, &p, u).unwrap();
        prop_assert!((via_riccati - eta.eval(u).unwrap()).abs() <= 1e-9 * (1.0 + via_riccati.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn simulation_is_deterministic(seed in any::<u64>(), xi in process(), eta in subordinator()) {
        prop_assume!(matches!(xi.mean().unwrap(), Some(m) if m > 0.0));
        let cfg = SimConfig::new(3.0, 0.05, 16, seed).unwrap();
        let a = simulate_functional(&xi, &eta, &cfg).unwrap();
        let b = simulate_functional(&xi, &eta, &cfg).unwrap();
        prop_assert_eq!(&a.values, &b.values);
        prop_assert!(a.values.iter().all(|&v| v >= 0.0));
    }
}
