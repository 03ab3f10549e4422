use dunkl_liyau::heat_kernel::log_kernel_upper_bound;
use dunkl_liyau::{e_kappa, kernel, log_e_kappa, log_kernel_derivatives, Adaptive, MultiplicityZ2};

fn ad() -> Adaptive {
    Adaptive::default()
}

/// Closed form at kappa = 1.
fn e_one(z: f64) -> f64 {
    if z.abs() < 1e-3 {
        // Series keeps the small-z cancellation in check.
        return 1.0 + z / 3.0 + z * z / 6.0 + z.powi(3) / 30.0 + z.powi(4) / 120.0;
    }
    z.sinh() / z + z.cosh() / z - z.sinh() / (z * z)
}

#[test]
fn dunkl_kernel_at_kappa_one() {
    for z in [-20.0, -3.0, -0.5, -1e-4, 0.0, 1e-4, 0.7, 2.0, 10.0, 40.0] {
        let got = e_kappa(z, 1.0, 1.0, &ad()).unwrap();
        let want = e_one(z);
        assert!((got - want).abs() <= 1e-11 * want.abs(), "z={z}: {got} vs {want}");
    }
    // Large arguments only in log space.
    let z = 800.0;
    let want = z - 2f64.ln() + (1.0 / z - 1.0 / (z * z) + 1.0 / z).ln();
    let got = log_e_kappa(z, 1.0, 1.0, &ad()).unwrap();
    assert!((got - want).abs() < 1e-10);
}

#[test]
fn dunkl_kernel_is_symmetric_in_arguments() {
    for kappa in [0.25, 1.5] {
        let a = log_e_kappa(1.7, -0.4, kappa, &ad()).unwrap();
        let b = log_e_kappa(-0.4, 1.7, kappa, &ad()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn gaussian_kernel_at_kappa_zero() {
    let kappa = MultiplicityZ2::new(vec![0.0, 0.0]).unwrap();
    let (t, x, y) = (0.7, [0.3, -1.2], [2.0, 0.5]);
    let r2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
    let want = (-r2 / (4.0 * t)).exp() / (4.0 * std::f64::consts::PI * t);
    let got = kernel(t, &x, &y, &kappa, &ad()).unwrap();
    assert!((got - want).abs() < 1e-14 * want);

    let k = log_kernel_derivatives(t, &x, &y, &kappa, &ad()).unwrap();
    for i in 0..2 {
        assert!((k.grad_x_log_p[i] + (x[i] - y[i]) / (2.0 * t)).abs() < 1e-14);
        assert!((k.hess_diag_x_log_p[i] + 1.0 / (2.0 * t)).abs() < 1e-14);
    }
    let dt = -1.0 / t + r2 / (4.0 * t * t);
    assert!((k.dt_log_p - dt).abs() < 1e-13);
}

#[test]
fn derivatives_match_finite_differences() {
    let kappa = MultiplicityZ2::new(vec![0.5, 2.5]).unwrap();
    let (t, x, y) = (0.9, [0.4, -1.1], [1.3, 0.8]);
    let k = log_kernel_derivatives(t, &x, &y, &kappa, &ad()).unwrap();
    let lp = |t: f64, x: &[f64]| log_kernel_derivatives(t, x, &y, &kappa, &ad()).unwrap().log_p;
    let h = 1e-4;
    for i in 0..2 {
        let mut xp = x;
        let mut xm = x;
        xp[i] += h;
        xm[i] -= h;
        let d1 = (lp(t, &xp) - lp(t, &xm)) / (2.0 * h);
        let d2 = (lp(t, &xp) - 2.0 * k.log_p + lp(t, &xm)) / (h * h);
        assert!((d1 - k.grad_x_log_p[i]).abs() < 1e-7);
        assert!((d2 - k.hess_diag_x_log_p[i]).abs() < 1e-5);
    }
    let dt = (lp(t + h, &x) - lp(t - h, &x)) / (2.0 * h);
    assert!((dt - k.dt_log_p).abs() < 1e-7);
}

#[test]
fn upper_bound_is_attained_at_the_origin() {
    let kappa = MultiplicityZ2::new(vec![1.5]).unwrap();
    let t = 2.0;
    let p = log_kernel_derivatives(t, &[0.0], &[0.0], &kappa, &ad()).unwrap().log_p;
    let bound = log_kernel_upper_bound(t, &[0.0], &[0.0], &kappa).unwrap();
    assert!((p - bound).abs() < 1e-13);
}
