//! The rank-one Dunkl kernel `E_kappa`, tilted Jacobi moments, and the
//! `Z_2^d` Dunkl heat kernel with its analytic log-derivatives.
//!
//! Everything is computed in log space. With `g(s) = (1-s)^{kappa-1}(1+s)^kappa`
//! and `a = x y / (2t)`,
//!
//! ```text
//! E_kappa(x, y)  = C_kappa * int_{-1}^{1} g(s) e^{s x y} ds,  C_kappa = Gamma(kappa+1/2) / (sqrt(pi) Gamma(kappa))
//! p_t(u, v)      = exp(-(u^2+v^2)/(4t)) E_kappa(u/sqrt(2t), v/sqrt(2t)) / (c_kappa (2t)^{kappa+1/2})
//! c_kappa        = int_R e^{-u^2/2} |u|^{2 kappa} du = 2^{kappa+1/2} Gamma(kappa+1/2)
//! ```
//!
//! and the `d`-dimensional kernel is the product over coordinates. Coordinates
//! with `kappa_i = 0` use the Gaussian closed forms.

use std::f64::consts::{LN_2, PI};

use crate::dunkl::{MultiplicityZ2, ScalarField};
use crate::error::{Error, Result};
use crate::quadrature::{cached_halfline_rule, cached_jacobi_rule, log_gamma, rel_close, Adaptive};

/// Moments of the Jacobi weight `g` tilted by `e^{a s}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRatios {
    pub a: f64,
    /// `ln m_0(a) = ln int g(s) e^{a s} ds`.
    pub log_m0: f64,
    /// `ln int g(s) e^{a (s - s*)} ds` with `s* = sign(a)`; equals
    /// `log_m0 - |a|`.
    pub log_m0_shifted: f64,
    /// `m_1 / m_0`, the tilted mean of `s`.
    pub r1: f64,
    /// `m_2 / m_0`.
    pub r2: f64,
    /// `r2 - r1^2`, accumulated as a central moment.
    pub variance: f64,
    /// Gauss–Jacobi order at which the adaptive loop stopped.
    pub nodes: usize,
}

fn tilted_sums(a: f64, kappa: f64, n: usize) -> Result<MomentRatios> {
    let rule = cached_jacobi_rule(kappa - 1.0, kappa, n)?;
    let shift = if a >= 0.0 { 1.0 } else { -1.0 };
    let tilt: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&s, &w)| w * (a * (s - shift)).exp())
        .collect();
    let m0: f64 = tilt.iter().sum();
    let r1 = tilt.iter().zip(&rule.nodes).map(|(e, s)| e * s).sum::<f64>() / m0;
    let variance = tilt
        .iter()
        .zip(&rule.nodes)
        .map(|(e, s)| e * (s - r1) * (s - r1))
        .sum::<f64>()
        / m0;
    if !(m0 > 0.0) || !m0.is_finite() {
        return Err(Error::convergence(
            "tilted Jacobi moments",
            format!("degenerate zeroth moment {m0} at a={a}, kappa={kappa}"),
        ));
    }
    let log_m0_shifted = m0.ln();
    Ok(MomentRatios {
        a,
        log_m0: log_m0_shifted + a.abs(),
        log_m0_shifted,
        r1,
        r2: variance + r1 * r1,
        variance,
        nodes: n,
    })
}

/// Beyond this `|a|` the tilt is a boundary layer of width `1/|a|` at
/// `s = sign(a)`, resolved by generalized Gauss–Laguerre in `w = |a| (1 - |s|)`.
const LAGUERRE_TILT: f64 = 50.0;

/// Large-tilt sums. For `a > 0`, `1 - s = w/a` gives
/// `m0 e^{-a} = a^{-kappa} int_0^{2a} w^{kappa-1} (2 - w/a)^kappa e^{-w} dw`;
/// for `a < 0`, `1 + s = w/|a|` gives the mirrored form with the exponents
/// swapped. The tail `w > 2|a|` is below `e^{-2|a|}` and dropped.
fn tilted_sums_laguerre(a: f64, kappa: f64, n: usize) -> Result<MomentRatios> {
    let b = a.abs();
    let (nu, other) = if a > 0.0 { (kappa - 1.0, kappa) } else { (kappa, kappa - 1.0) };
    let rule = cached_halfline_rule(nu + 0.5, n)?;
    let mut mass = 0.0;
    let mut mean = 0.0;
    let terms: Vec<(f64, f64)> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .filter(|(&w, _)| w < 2.0 * b)
        .map(|(&w, &wt)| (w, wt * (2.0 - w / b).powf(other)))
        .collect();
    for &(w, e) in &terms {
        mass += e;
        mean += e * w;
    }
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::convergence(
            "tilted Jacobi moments",
            format!("degenerate zeroth moment {mass} at a={a}, kappa={kappa}"),
        ));
    }
    mean /= mass;
    let var_w = terms.iter().map(|&(w, e)| e * (w - mean) * (w - mean)).sum::<f64>() / mass;
    let sign = a.signum();
    let r1 = sign * (1.0 - mean / b);
    let variance = var_w / (b * b);
    let log_m0_shifted = mass.ln() - (nu + 1.0) * b.ln();
    Ok(MomentRatios {
        a,
        log_m0: log_m0_shifted + b,
        log_m0_shifted,
        r1,
        r2: variance + r1 * r1,
        variance,
        nodes: n,
    })
}

/// Tilted moment ratios for `kappa > 0`, by Gauss–Jacobi node doubling
/// (Gauss–Laguerre in the boundary-layer variable for large `|a|`).
pub fn moment_ratios(a: f64, kappa: f64, adaptive: &Adaptive) -> Result<MomentRatios> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::domain(format!(
            "moment ratios need kappa > 0 (kappa = 0 is the Gaussian branch), got {kappa}"
        )));
    }
    if !a.is_finite() {
        return Err(Error::domain(format!("tilt must be finite, got {a}")));
    }
    let large = a.abs() >= LAGUERRE_TILT;
    adaptive.run(
        "tilted Jacobi moments",
        |n| {
            if large {
                tilted_sums_laguerre(a, kappa, n)
            } else {
                tilted_sums(a, kappa, n)
            }
        },
        |p, c, tol| {
            (p.log_m0_shifted - c.log_m0_shifted).abs() <= tol
                && (p.r1 - c.r1).abs() <= tol
                && rel_close(p.variance, c.variance, tol, 1e-300)
        },
    )
}

/// `ln C_kappa = ln Gamma(kappa + 1/2) - ln sqrt(pi) - ln Gamma(kappa)`.
pub fn log_dunkl_constant(kappa: f64) -> Result<f64> {
    Ok(log_gamma(kappa + 0.5)? - 0.5 * PI.ln() - log_gamma(kappa)?)
}

/// `ln c_kappa` for one coordinate: `(kappa + 1/2) ln 2 + ln Gamma(kappa + 1/2)`.
pub fn log_normalizer_1d(kappa: f64) -> Result<f64> {
    Ok((kappa + 0.5) * LN_2 + log_gamma(kappa + 0.5)?)
}

/// `ln c_kappa = sum_i ln c_{kappa_i}`.
pub fn log_normalizer(kappa: &MultiplicityZ2) -> Result<f64> {
    kappa.kappa().iter().map(|&k| log_normalizer_1d(k)).sum()
}

/// `ln E_kappa(x, y)`.
pub fn log_e_kappa(x: f64, y: f64, kappa: f64, adaptive: &Adaptive) -> Result<f64> {
    if !(kappa >= 0.0) {
        return Err(Error::domain(format!("kappa must be >= 0, got {kappa}")));
    }
    let a = x * y;
    if kappa == 0.0 {
        return Ok(a);
    }
    Ok(log_dunkl_constant(kappa)? + moment_ratios(a, kappa, adaptive)?.log_m0)
}

fn checked_exp(log: f64) -> Result<f64> {
    if log > f64::MAX.ln() {
        Err(Error::Overflow(log))
    } else {
        Ok(log.exp())
    }
}

/// `E_kappa(x, y)`; errors when the value overflows an `f64`.
pub fn e_kappa(x: f64, y: f64, kappa: f64, adaptive: &Adaptive) -> Result<f64> {
    checked_exp(log_e_kappa(x, y, kappa, adaptive)?)
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("time must be positive and finite, got {t}")))
    }
}

/// Log-kernel and its derivatives for one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordinateDerivatives {
    pub log_p: f64,
    /// `d/du ln p_t(u, v)`.
    pub d_u: f64,
    /// `d^2/du^2 ln p_t(u, v)`.
    pub d_uu: f64,
    /// `d/dt ln p_t(u, v)`.
    pub d_t: f64,
    /// Tilt `u v / (2t)`.
    pub a: f64,
    /// Tilted moments; `None` on the Gaussian branch.
    pub moments: Option<MomentRatios>,
}

pub fn coordinate_derivatives(
    t: f64,
    u: f64,
    v: f64,
    kappa: f64,
    adaptive: &Adaptive,
) -> Result<CoordinateDerivatives> {
    check_time(t)?;
    let a = u * v / (2.0 * t);
    if kappa == 0.0 {
        let diff = u - v;
        return Ok(CoordinateDerivatives {
            log_p: -0.5 * (4.0 * PI * t).ln() - diff * diff / (4.0 * t),
            d_u: -diff / (2.0 * t),
            d_uu: -1.0 / (2.0 * t),
            d_t: -1.0 / (2.0 * t) + diff * diff / (4.0 * t * t),
            a,
            moments: None,
        });
    }
    if !(kappa > 0.0) {
        return Err(Error::domain(format!("kappa must be >= 0, got {kappa}")));
    }
    let m = moment_ratios(a, kappa, adaptive)?;
    let gap = u.abs() - v.abs();
    let log_p = -log_normalizer_1d(kappa)? - (kappa + 0.5) * (2.0 * t).ln() - gap * gap / (4.0 * t)
        + log_dunkl_constant(kappa)?
        + m.log_m0_shifted;
    let c = v / (2.0 * t);
    Ok(CoordinateDerivatives {
        log_p,
        d_u: -u / (2.0 * t) + c * m.r1,
        d_uu: -1.0 / (2.0 * t) + c * c * m.variance,
        d_t: -(kappa + 0.5) / t + (u * u + v * v) / (4.0 * t * t) - a / t * m.r1,
        a,
        moments: Some(m),
    })
}

/// `ln p^i_t(u, v)` for a single coordinate with multiplicity `kappa`.
pub fn log_kernel_1d(t: f64, u: f64, v: f64, kappa: f64, adaptive: &Adaptive) -> Result<f64> {
    Ok(coordinate_derivatives(t, u, v, kappa, adaptive)?.log_p)
}

pub fn kernel_1d(t: f64, u: f64, v: f64, kappa: f64, adaptive: &Adaptive) -> Result<f64> {
    checked_exp(log_kernel_1d(t, u, v, kappa, adaptive)?)
}

fn check_pair(x: &[f64], y: &[f64], kappa: &MultiplicityZ2) -> Result<()> {
    kappa.check_point(x)?;
    kappa.check_point(y)
}

/// `ln p_t(x, y) = sum_i ln p^i_t(x_i, y_i)`.
pub fn log_kernel(
    t: f64,
    x: &[f64],
    y: &[f64],
    kappa: &MultiplicityZ2,
    adaptive: &Adaptive,
) -> Result<f64> {
    check_pair(x, y, kappa)?;
    (0..x.len())
        .map(|i| log_kernel_1d(t, x[i], y[i], kappa.get(i), adaptive))
        .sum()
}

pub fn kernel(
    t: f64,
    x: &[f64],
    y: &[f64],
    kappa: &MultiplicityZ2,
    adaptive: &Adaptive,
) -> Result<f64> {
    checked_exp(log_kernel(t, x, y, kappa, adaptive)?)
}

/// `ln` of the Gaussian-type upper bound
/// `p_t(x,y) <= exp(-delta(x,y)^2 / 4t) / (c_kappa (2t)^{d/2 + lambda})`,
/// with `delta(x, y)^2 = sum_i min((x_i - y_i)^2, (x_i + y_i)^2)`.
pub fn log_kernel_upper_bound(
    t: f64,
    x: &[f64],
    y: &[f64],
    kappa: &MultiplicityZ2,
) -> Result<f64> {
    check_pair(x, y, kappa)?;
    check_time(t)?;
    let delta2: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b).powi(2).min((a + b).powi(2)))
        .sum();
    let exponent = 0.5 * kappa.dim() as f64 + kappa.lambda();
    Ok(-log_normalizer(kappa)? - exponent * (2.0 * t).ln() - delta2 / (4.0 * t))
}

/// The heat kernel and its `x`/`t` log-derivatives at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub kappa: MultiplicityZ2,
    pub log_p: f64,
    pub grad_x_log_p: Vec<f64>,
    pub hess_diag_x_log_p: Vec<f64>,
    pub dt_log_p: f64,
    pub coordinates: Vec<CoordinateDerivatives>,
}

impl KernelPoint {
    pub fn p(&self) -> Result<f64> {
        checked_exp(self.log_p)
    }
}

pub fn log_kernel_derivatives(
    t: f64,
    x: &[f64],
    y: &[f64],
    kappa: &MultiplicityZ2,
    adaptive: &Adaptive,
) -> Result<KernelPoint> {
    check_pair(x, y, kappa)?;
    let coordinates = (0..x.len())
        .map(|i| coordinate_derivatives(t, x[i], y[i], kappa.get(i), adaptive))
        .collect::<Result<Vec<_>>>()?;
    Ok(KernelPoint {
        t,
        x: x.to_vec(),
        y: y.to_vec(),
        kappa: kappa.clone(),
        log_p: coordinates.iter().map(|c| c.log_p).sum(),
        grad_x_log_p: coordinates.iter().map(|c| c.d_u).collect(),
        hess_diag_x_log_p: coordinates.iter().map(|c| c.d_uu).collect(),
        dt_log_p: coordinates.iter().map(|c| c.d_t).sum(),
        coordinates,
    })
}

/// `x -> ln p_t(x, y)` as a [`ScalarField`].
#[derive(Debug, Clone)]
pub struct LogKernelField {
    pub t: f64,
    pub y: Vec<f64>,
    pub kappa: MultiplicityZ2,
    pub adaptive: Adaptive,
}

impl LogKernelField {
    pub fn new(t: f64, y: &[f64], kappa: &MultiplicityZ2, adaptive: Adaptive) -> Self {
        LogKernelField {
            t,
            y: y.to_vec(),
            kappa: kappa.clone(),
            adaptive,
        }
    }

    fn point(&self, x: &[f64]) -> Result<KernelPoint> {
        log_kernel_derivatives(self.t, x, &self.y, &self.kappa, &self.adaptive)
    }
}

impl ScalarField for LogKernelField {
    fn dim(&self) -> usize {
        self.kappa.dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        log_kernel(self.t, x, &self.y, &self.kappa, &self.adaptive)
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.point(x)?.grad_x_log_p)
    }
    fn hessian_diag(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.point(x)?.hess_diag_x_log_p)
    }
}

/// `x -> p_t(x, y) / exp(log_scale)` as a [`ScalarField`].
///
/// The constant rescaling keeps values representable far out in the tails;
/// every linear identity in `p` is unaffected by it.
#[derive(Debug, Clone)]
pub struct KernelField {
    pub log_field: LogKernelField,
    pub log_scale: f64,
}

impl KernelField {
    pub fn new(t: f64, y: &[f64], kappa: &MultiplicityZ2, adaptive: Adaptive) -> Self {
        KernelField {
            log_field: LogKernelField::new(t, y, kappa, adaptive),
            log_scale: 0.0,
        }
    }

    /// Rescale so that the field equals one at `x`.
    pub fn normalized_at(mut self, x: &[f64]) -> Result<Self> {
        self.log_scale = self.log_field.value(x)?;
        Ok(self)
    }
}

impl ScalarField for KernelField {
    fn dim(&self) -> usize {
        self.log_field.dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok((self.log_field.value(x)? - self.log_scale).exp())
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let kp = self.log_field.point(x)?;
        let p = (kp.log_p - self.log_scale).exp();
        Ok(kp.grad_x_log_p.iter().map(|g| p * g).collect())
    }
    fn hessian_diag(&self, x: &[f64]) -> Result<Vec<f64>> {
        let kp = self.log_field.point(x)?;
        let p = (kp.log_p - self.log_scale).exp();
        Ok(kp
            .grad_x_log_p
            .iter()
            .zip(&kp.hess_diag_x_log_p)
            .map(|(g, h)| p * (h + g * g))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ad() -> Adaptive {
        Adaptive::default()
    }

    #[test]
    fn untilted_mean_is_one_over_two_kappa_plus_one() {
        // int s g / int g = B(kappa, kappa+2)*... reduces to 1/(2 kappa + 1).
        for kappa in [0.25, 0.5, 1.0, 2.5] {
            let m = moment_ratios(0.0, kappa, &ad()).unwrap();
            assert!((m.r1 - 1.0 / (2.0 * kappa + 1.0)).abs() < 1e-13, "kappa={kappa}");
            assert!(m.variance > 0.0);
        }
    }

    #[test]
    fn large_tilt_concentrates_at_one() {
        let mut last = -1.0;
        for a in [1.0, 10.0, 50.0, 200.0] {
            let m = moment_ratios(a, 0.5, &ad()).unwrap();
            assert!(m.r1 > last && m.r1 < 1.0);
            last = m.r1;
        }
        assert!(last > 0.99);
    }

    #[test]
    fn moments_reject_nonpositive_kappa() {
        assert!(moment_ratios(1.0, 0.0, &ad()).is_err());
        assert!(moment_ratios(1.0, -1.0, &ad()).is_err());
    }

    #[test]
    fn dunkl_kernel_at_zero_is_one() {
        for kappa in [0.1, 0.25, 1.0, 3.7] {
            for x in [-4.0, 0.0, 2.5] {
                let e = e_kappa(x, 0.0, kappa, &ad()).unwrap();
                assert!((e - 1.0).abs() < 1e-13, "kappa={kappa} e={e}");
            }
        }
    }

    #[test]
    fn zero_multiplicity_is_exponential_and_symmetric() {
        assert!((e_kappa(1.3, -0.4, 0.0, &ad()).unwrap() - (-0.52f64).exp()).abs() < 1e-15);
        let a = log_e_kappa(1.7, -2.2, 0.8, &ad()).unwrap();
        let b = log_e_kappa(-2.2, 1.7, 0.8, &ad()).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn plain_e_kappa_reports_overflow() {
        assert!(matches!(e_kappa(40.0, 40.0, 0.0, &ad()), Err(Error::Overflow(_))));
        assert!(log_e_kappa(40.0, 40.0, 1.0, &ad()).unwrap() > 1500.0);
    }

    #[test]
    fn gaussian_branch_matches_heat_kernel() {
        for (t, u, v) in [(0.3, 1.0, -0.5), (2.0, 0.0, 3.0), (0.01, 0.2, 0.25)] {
            let p = kernel_1d(t, u, v, 0.0, &ad()).unwrap();
            let g = (4.0 * PI * t).powf(-0.5) * (-(u - v) * (u - v) / (4.0 * t)).exp();
            assert!((p - g).abs() < 1e-13 * g);
        }
        assert!(kernel_1d(0.0, 1.0, 1.0, 0.5, &ad()).is_err());
    }

    #[test]
    fn small_kappa_approaches_gaussian() {
        let g = log_kernel_1d(0.7, 0.9, 0.4, 0.0, &ad()).unwrap();
        let k = log_kernel_1d(0.7, 0.9, 0.4, 1e-6, &ad()).unwrap();
        assert!((g - k).abs() < 1e-4);
    }

    #[test]
    fn kernel_is_symmetric_and_sign_flip_invariant() {
        let kappa = MultiplicityZ2::new(vec![0.5, 1.5]).unwrap();
        let x = [0.7, -1.3];
        let y = [-2.1, 0.4];
        let p = log_kernel(0.6, &x, &y, &kappa, &ad()).unwrap();
        let q = log_kernel(0.6, &y, &x, &kappa, &ad()).unwrap();
        assert!((p - q).abs() < 1e-12);
        for flips in [[1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]] {
            let gx: Vec<f64> = x.iter().zip(&flips).map(|(a, s)| a * s).collect();
            let gy: Vec<f64> = y.iter().zip(&flips).map(|(a, s)| a * s).collect();
            let r = log_kernel(0.6, &gx, &gy, &kappa, &ad()).unwrap();
            assert!((p - r).abs() < 1e-12);
        }
    }

    #[test]
    fn log_derivatives_match_finite_differences() {
        let kappa = MultiplicityZ2::new(vec![0.25, 2.5]).unwrap();
        let (t, x, y) = (0.8, [0.6, -1.1], [1.4, 0.9]);
        let kp = log_kernel_derivatives(t, &x, &y, &kappa, &ad()).unwrap();
        let lp = |t: f64, x: &[f64]| log_kernel(t, x, &y, &kappa, &ad()).unwrap();
        let h = 1e-4;
        for i in 0..2 {
            let mut up = x;
            let mut down = x;
            up[i] += h;
            down[i] -= h;
            let (fu, f0, fd) = (lp(t, &up), lp(t, &x), lp(t, &down));
            assert!((kp.grad_x_log_p[i] - (fu - fd) / (2.0 * h)).abs() < 1e-7);
            assert!((kp.hess_diag_x_log_p[i] - (fu - 2.0 * f0 + fd) / (h * h)).abs() < 1e-5);
        }
        let dt = (lp(t + h, &x) - lp(t - h, &x)) / (2.0 * h);
        assert!((kp.dt_log_p - dt).abs() < 1e-7);
    }

    #[test]
    fn second_derivative_bounded_below() {
        let kappa = MultiplicityZ2::new(vec![0.25, 1.0]).unwrap();
        for t in [0.01, 0.3, 5.0] {
            for x in [[0.0, 1.0], [-3.0, 0.3], [10.0, -10.0]] {
                for y in [[1.0, -0.3], [3.0, 10.0]] {
                    let kp = log_kernel_derivatives(t, &x, &y, &kappa, &ad()).unwrap();
                    for h in &kp.hess_diag_x_log_p {
                        assert!(*h >= -1.0 / (2.0 * t) - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn kernel_field_scaling_preserves_log_derivatives() {
        let kappa = MultiplicityZ2::new(vec![0.75]).unwrap();
        let f = KernelField::new(0.2, &[1.0], &kappa, ad()).normalized_at(&[0.5]).unwrap();
        assert!((f.value(&[0.5]).unwrap() - 1.0).abs() < 1e-14);
        let kp = log_kernel_derivatives(0.2, &[0.5], &[1.0], &kappa, &ad()).unwrap();
        assert!((f.gradient(&[0.5]).unwrap()[0] - kp.grad_x_log_p[0]).abs() < 1e-12);
    }
}
