use dunkl_liyau::inequalities::DEFAULT_TOLERANCE;
use dunkl_liyau::semigroup::{heat_residual, symmetry_check, upper_bound_check};
use dunkl_liyau::{
    chain_rule_residual, f_of_a, h_of_a, liyau_functional, log_convexity_check, log_kernel, moment_ratios,
    pi_psi, Adaptive, FnField, MultiplicityZ2, StdPsi,
};
use proptest::prelude::*;

fn ad() -> Adaptive {
    Adaptive::default()
}

fn kappa_vec(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), 0.01..4.0f64], d)
}

fn point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), -12.0..12.0f64], d)
}

/// `(kappa, x, y)` of a shared dimension in 1..=3.
fn config() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (1usize..=3).prop_flat_map(|d| (kappa_vec(d), point(d), point(d)))
}

fn time() -> impl Strategy<Value = f64> {
    (-2.0..2.0f64).prop_map(|e| 10f64.powf(e))
}

fn tilt() -> impl Strategy<Value = f64> {
    (-3.0..3.0f64, any::<bool>()).prop_map(|(e, neg)| if neg { -(10f64.powf(e)) } else { 10f64.powf(e) })
}

/// `1 + sum c_i (x_i - b_i)^2`, strictly positive.
fn quadratic(c: Vec<f64>, b: Vec<f64>) -> FnField {
    let (c1, b1, c2) = (c.clone(), b.clone(), c.clone());
    FnField::new(
        c.len(),
        move |x| 1.0 + x.iter().zip(&c).zip(&b).map(|((x, c), b)| c * (x - b) * (x - b)).sum::<f64>(),
        move |x| x.iter().zip(&c1).zip(&b1).map(|((x, c), b)| 2.0 * c * (x - b)).collect(),
        move |_| c2.iter().map(|c| 2.0 * c).collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kernel_is_symmetric_and_reflection_invariant((k, x, y) in config(), t in time()) {
        let kappa = MultiplicityZ2::new(k).unwrap();
        let r = symmetry_check(t, &x, &y, &kappa, &ad()).unwrap();
        prop_assert!(r.pass, "{r:?}");
        let flip = |v: &[f64]| v.iter().map(|a| -a).collect::<Vec<_>>();
        let a = log_kernel(t, &x, &y, &kappa, &ad()).unwrap();
        let b = log_kernel(t, &flip(&x), &flip(&y), &kappa, &ad()).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn liyau_deficit_is_nonnegative((k, x, y) in config(), t in time()) {
        let kappa = MultiplicityZ2::new(k).unwrap();
        let dec = liyau_functional(t, &x, &y, &kappa, &ad()).unwrap();
        prop_assert!(dec.deficit() >= -DEFAULT_TOLERANCE, "deficit {}", dec.deficit());
        prop_assert!(dec.terms.iter().all(|c| c.variance_term >= 0.0));
    }

    #[test]
    fn gaussian_case_is_sharp(d in 1usize..=3, t in time(), seed in point(6)) {
        let kappa = MultiplicityZ2::uniform(d, 0.0).unwrap();
        let dec = liyau_functional(t, &seed[..d], &seed[3..3 + d], &kappa, &ad()).unwrap();
        prop_assert!(dec.deficit().abs() <= 1e-10);
    }

    #[test]
    fn equality_at_the_origin_source(k in kappa_vec(2), x in point(2), t in time()) {
        let kappa = MultiplicityZ2::new(k).unwrap();
        let dec = liyau_functional(t, &x, &[0.0, 0.0], &kappa, &ad()).unwrap();
        prop_assert!(dec.deficit().abs() <= 1e-8);
    }

    #[test]
    fn f_is_nonnegative_and_h_odd_and_increasing(a in tilt(), b in tilt(), kappa in 0.01..4.0f64) {
        prop_assert!(f_of_a(a, kappa, &ad()).unwrap() >= -1e-10);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let h_lo = h_of_a(lo, kappa, &ad()).unwrap();
        let h_hi = h_of_a(hi, kappa, &ad()).unwrap();
        prop_assert!(h_hi >= h_lo - 1e-12);
        let h_neg = h_of_a(-lo, kappa, &ad()).unwrap();
        prop_assert!((h_lo + h_neg).abs() <= 1e-10);
    }

    #[test]
    fn tilted_variance_is_nonnegative(a in tilt(), kappa in 0.01..4.0f64) {
        let m = moment_ratios(a, kappa, &ad()).unwrap();
        prop_assert!(m.variance >= 0.0);
        prop_assert!(m.r1.abs() <= 1.0 && m.r2 <= 1.0);
    }

    #[test]
    fn chain_rule_holds(
        k in kappa_vec(2),
        x in point(2),
        c in prop::collection::vec(0.01..2.0f64, 2),
        b in prop::collection::vec(-3.0..3.0f64, 2),
    ) {
        let kappa = MultiplicityZ2::new(k).unwrap();
        let x: Vec<f64> = x.iter().map(|v| v / 4.0).collect();
        let field = quadratic(c, b);
        for psi in [StdPsi::Log, StdPsi::Exp, StdPsi::Square, StdPsi::Cube] {
            let res = chain_rule_residual(&field, psi, &x, &kappa).unwrap();
            prop_assert!(res.relative() <= 1e-8, "{psi:?}: {res:?}");
        }
        prop_assert!(pi_psi(&field, &StdPsi::Log, &x, &kappa).unwrap() <= 0.0);
    }

    #[test]
    fn log_ratio_is_convex((k, x, y) in config(), t in time()) {
        let kappa = MultiplicityZ2::new(k).unwrap();
        let r = log_convexity_check(t, &x, &y, &kappa, &ad(), 1e-10).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }

    #[test]
    fn kernel_solves_the_heat_equation((k, x, y) in config(), t in time()) {
        let kappa = MultiplicityZ2::new(k).unwrap();
        prop_assert!(heat_residual(t, &x, &y, &kappa, &ad()).unwrap() <= 1e-7);
    }

    #[test]
    fn kernel_obeys_the_gaussian_upper_bound((k, x, y) in config(), t in time()) {
        let kappa = MultiplicityZ2::new(k).unwrap();
        let r = upper_bound_check(t, &x, &y, &kappa, &ad()).unwrap();
        prop_assert!(r.pass, "{r:?}");
    }
}
