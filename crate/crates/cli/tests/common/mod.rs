//! Brute-force reference values computed without Gauss quadrature or gamma
//! functions.
//!
//! Tilted moments `int s^k (1-s)^{kappa-1} (1+s)^kappa e^{a (s - s*)} ds`
//! use the double-exponential map `s = tanh(pi/2 sinh u)` and a plain
//! trapezoid sum in `u`. Endpoint factors are formed from `q = pi/2 sinh u`
//! as `1 -+ s = e^{-+q} / cosh q`, so nothing cancels near `s = +-1`.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, LN_2};

pub const POINTS: usize = 100_000;
const U_MAX: f64 = 8.0;

fn ln_cosh(q: f64) -> f64 {
    let a = q.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// Shifted zeroth, first and second moments.
pub fn moments(a: f64, kappa: f64) -> [f64; 3] {
    let shift = if a >= 0.0 { 1.0 } else { -1.0 };
    let h = 2.0 * U_MAX / (POINTS - 1) as f64;
    let mut m = [0.0; 3];
    for j in 0..POINTS {
        let u = -U_MAX + h * j as f64;
        let q = FRAC_PI_2 * u.sinh();
        let lc = ln_cosh(q);
        let ln_minus = -q - lc; // ln(1 - s)
        let ln_plus = q - lc; // ln(1 + s)
        let s = q.tanh();
        // a (s - s*) = -a (1 - s) or a (1 + s).
        let tilt = if shift > 0.0 { -a * ln_minus.exp() } else { a * ln_plus.exp() };
        let ln_jac = FRAC_PI_2.ln() + ln_cosh(u) - 2.0 * lc;
        let w = ((kappa - 1.0) * ln_minus + kappa * ln_plus + tilt + ln_jac).exp();
        m[0] += w;
        m[1] += w * s;
        m[2] += w * s * s;
    }
    m.map(|v| v * h)
}

pub struct Reference {
    pub log_m0_shifted: f64,
    pub r1: f64,
    pub r2: f64,
    pub variance: f64,
}

pub fn reference(a: f64, kappa: f64) -> Reference {
    let [m0, m1, m2] = moments(a, kappa);
    let r1 = m1 / m0;
    let r2 = m2 / m0;
    Reference {
        log_m0_shifted: m0.ln(),
        r1,
        r2,
        variance: central_variance(a, kappa, r1) / m0,
    }
}

fn central_variance(a: f64, kappa: f64, mean: f64) -> f64 {
    let shift = if a >= 0.0 { 1.0 } else { -1.0 };
    let h = 2.0 * U_MAX / (POINTS - 1) as f64;
    let mut acc = 0.0;
    for j in 0..POINTS {
        let u = -U_MAX + h * j as f64;
        let q = FRAC_PI_2 * u.sinh();
        let lc = ln_cosh(q);
        let ln_minus = -q - lc;
        let ln_plus = q - lc;
        let s = q.tanh();
        let tilt = if shift > 0.0 { -a * ln_minus.exp() } else { a * ln_plus.exp() };
        let ln_jac = FRAC_PI_2.ln() + ln_cosh(u) - 2.0 * lc;
        let w = ((kappa - 1.0) * ln_minus + kappa * ln_plus + tilt + ln_jac).exp();
        acc += w * (s - mean) * (s - mean);
    }
    acc * h
}

/// `ln E_kappa(a, 1)`, with the constant fixed by `E_kappa(0, 1) = 1`.
pub fn log_e_kappa(a: f64, kappa: f64) -> f64 {
    let [m0, _, _] = moments(a, kappa);
    let [z0, _, _] = moments(0.0, kappa);
    m0.ln() + a.abs() - z0.ln()
}

/// `f(a) = 2a r1(a) + ln m0(-a) - ln m0(a)`.
pub fn f_of_a(a: f64, kappa: f64) -> f64 {
    let plus = reference(a, kappa);
    let [mm, _, _] = moments(-a, kappa);
    2.0 * a * plus.r1 + mm.ln() - plus.log_m0_shifted
}

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}
