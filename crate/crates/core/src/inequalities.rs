//! The Li–Yau functional of the heat kernel with its per-coordinate
//! decomposition, the auxiliary functions `f` and `h` behind its sign, and
//! the gradient-form, Harnack and log-convexity checks.
//!
//! For one coordinate with `a = x y / (2t)`,
//!
//! ```text
//! I = d_xx log p + kappa/x^2 [2x d_x log p - log p(x) + log p(-x)]
//!   = -1/(2t) + (y/2t)^2 Var_a(s) + kappa/x^2 (-x^2/t + f(a))
//! f(a) = 2a r1(a) + log m0(-a) - log m0(a)
//! ```
//!
//! so `-Delta_kappa log p_t(., y)(x) = -sum_i I_i <= (d + 2 lambda)/(2t)`
//! exactly when every `Var_a >= 0` and `f >= 0`.

use serde::{Deserialize, Serialize};

use crate::dunkl::{dunkl_laplacian_terms, is_on_hyperplane, MultiplicityZ2};
use crate::error::{Error, Result};
use crate::heat_kernel::{log_kernel, log_kernel_derivatives, moment_ratios, LogKernelField, MomentRatios};
use crate::quadrature::Adaptive;
use crate::report::{ClaimId, GridPoint, VerificationReport};
use crate::solution::PositiveSolution;

/// Default absolute tolerance on inequality deficits.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

fn f_from_moments(plus: &MomentRatios, minus: &MomentRatios) -> f64 {
    // m0(+-a) carry the same exponential shift |a|, so the log ratio is the
    // ratio of the shifted integrals.
    2.0 * plus.a * plus.r1 + minus.log_m0_shifted - plus.log_m0_shifted
}

/// `f(a) = 2a m1(a)/m0(a) + log(m0(-a) / m0(a))`, for `kappa > 0`.
pub fn f_of_a(a: f64, kappa: f64, adaptive: &Adaptive) -> Result<f64> {
    let plus = moment_ratios(a, kappa, adaptive)?;
    let minus = moment_ratios(-a, kappa, adaptive)?;
    Ok(f_from_moments(&plus, &minus))
}

/// `h(a) / (m0(a) m0(-a)) = r1(a) - r1(-a)`, for `kappa > 0`.
///
/// The positive rescaling of
/// `h(a) = m1(a) m0(-a) - m0(a) m1(-a)` keeps sign and zero set and is
/// antisymmetric by construction.
pub fn h_of_a(a: f64, kappa: f64, adaptive: &Adaptive) -> Result<f64> {
    let plus = moment_ratios(a, kappa, adaptive)?;
    let minus = moment_ratios(-a, kappa, adaptive)?;
    Ok(plus.r1 - minus.r1)
}

/// One coordinate's share of the Li–Yau functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoordinateTerm {
    pub a: f64,
    /// `(y/2t)^2 (r2 - r1^2)`.
    pub variance_term: f64,
    /// `f(a)`; zero on Gaussian coordinates.
    pub f_a: f64,
    /// The reflection part `J`, including `-kappa/t`.
    pub j: f64,
    /// `I = d_xx log p + J`.
    pub i: f64,
    /// Whether the mirror limit was used.
    pub on_hyperplane: bool,
}

impl CoordinateTerm {
    /// This coordinate's contribution `1/(2t) + kappa/t + I` to the deficit.
    pub fn deficit(&self, t: f64, kappa: f64) -> f64 {
        (0.5 + kappa) / t + self.i
    }
}

/// Per-coordinate Li–Yau term. Mirror points (`|x| < eps`) go through the
/// generic Dunkl Laplacian of the one-dimensional log-kernel.
pub fn coordinate_term(
    t: f64,
    x: f64,
    y: f64,
    kappa: f64,
    adaptive: &Adaptive,
) -> Result<CoordinateTerm> {
    let cd = crate::heat_kernel::coordinate_derivatives(t, x, y, kappa, adaptive)?;
    let a = cd.a;
    let Some(plus) = cd.moments else {
        return Ok(CoordinateTerm {
            a,
            variance_term: 0.0,
            f_a: 0.0,
            j: 0.0,
            i: cd.d_uu,
            on_hyperplane: false,
        });
    };
    let c = y / (2.0 * t);
    let variance_term = c * c * plus.variance;
    let minus = moment_ratios(-a, kappa, adaptive)?;
    let f_a = f_from_moments(&plus, &minus);
    if is_on_hyperplane(&[x], 0) {
        let k1 = MultiplicityZ2::new(vec![kappa])?;
        let field = LogKernelField::new(t, &[y], &k1, *adaptive);
        let i = dunkl_laplacian_terms(&field, &[x], &k1)?[0];
        return Ok(CoordinateTerm {
            a,
            variance_term,
            f_a,
            j: i - cd.d_uu,
            i,
            on_hyperplane: true,
        });
    }
    let j = kappa / (x * x) * (-x * x / t + f_a);
    Ok(CoordinateTerm {
        a,
        variance_term,
        f_a,
        j,
        i: -0.5 / t + variance_term + j,
        on_hyperplane: false,
    })
}

/// `-Delta_kappa log p_t(., y)(x)` broken down by coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiYauDecomposition {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub kappa: Vec<f64>,
    pub terms: Vec<CoordinateTerm>,
    /// `-sum_i I_i`.
    pub total: f64,
    /// `(d + 2 lambda) / (2t)`.
    pub bound: f64,
}

impl LiYauDecomposition {
    pub fn from_terms(t: f64, x: &[f64], y: &[f64], kappa: &MultiplicityZ2, terms: Vec<CoordinateTerm>) -> Self {
        let total = -terms.iter().map(|c| c.i).sum::<f64>();
        LiYauDecomposition {
            t,
            x: x.to_vec(),
            y: y.to_vec(),
            kappa: kappa.kappa().to_vec(),
            terms,
            total,
            bound: kappa.liyau_bound(t),
        }
    }

    /// `bound - total`, accumulated per coordinate so that equality cases
    /// cancel exactly.
    pub fn deficit(&self) -> f64 {
        self.terms
            .iter()
            .zip(&self.kappa)
            .map(|(c, &k)| c.deficit(self.t, k))
            .sum()
    }

    pub fn report(&self, tolerance: f64) -> Result<VerificationReport> {
        let mut r = VerificationReport::inequality(
            ClaimId::LiyauKernel,
            GridPoint::txy(self.t, &self.x, &self.y, &self.kappa),
            self.total,
            self.bound,
            tolerance,
        )?;
        r.deficit = self.deficit();
        r.pass = r.deficit >= -tolerance;
        Ok(r)
    }
}

pub fn liyau_functional(
    t: f64,
    x: &[f64],
    y: &[f64],
    kappa: &MultiplicityZ2,
    adaptive: &Adaptive,
) -> Result<LiYauDecomposition> {
    kappa.check_point(x)?;
    kappa.check_point(y)?;
    let terms = (0..x.len())
        .map(|i| coordinate_term(t, x[i], y[i], kappa.get(i), adaptive))
        .collect::<Result<Vec<_>>>()?;
    Ok(LiYauDecomposition::from_terms(t, x, y, kappa, terms))
}

/// `|grad u|^2 / u^2 - d_t u / u <= beta` at `(t, x)`.
pub fn gradient_form_check<S: PositiveSolution + ?Sized>(
    u: &S,
    t: f64,
    x: &[f64],
    beta: f64,
    kappa: &MultiplicityZ2,
    tolerance: f64,
) -> Result<VerificationReport> {
    let g = u.grad_log(t, x)?;
    let lhs = g.iter().map(|v| v * v).sum::<f64>() - u.dt_log(t, x)?;
    VerificationReport::inequality(
        ClaimId::GradientForm,
        GridPoint::txy(t, x, &[], kappa.kappa()),
        lhs,
        beta,
        tolerance,
    )
}

/// `u(s, x) <= u(t, y) (t/s)^{lambda + d/2} exp(|x - y|^2 / (4 (t - s)))`,
/// compared in log space.
pub fn harnack_check<S: PositiveSolution + ?Sized>(
    u: &S,
    s: f64,
    x: &[f64],
    t: f64,
    y: &[f64],
    kappa: &MultiplicityZ2,
    tolerance: f64,
) -> Result<VerificationReport> {
    if !(s > 0.0) || !(s < t) {
        return Err(Error::domain(format!("Harnack needs 0 < s < t, got s={s}, t={t}")));
    }
    kappa.check_point(x)?;
    kappa.check_point(y)?;
    let dist2: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
    let exponent = kappa.lambda() + 0.5 * kappa.dim() as f64;
    let lhs = u.log_value(s, x)?;
    let rhs = u.log_value(t, y)? + exponent * (t / s).ln() + dist2 / (4.0 * (t - s));
    let point = GridPoint {
        t: Some(t),
        s: Some(s),
        x: x.to_vec(),
        y: y.to_vec(),
        a: None,
        kappa: kappa.kappa().to_vec(),
    };
    VerificationReport::inequality(ClaimId::Harnack, point, lhs, rhs, tolerance)
}

/// `ln q_t(x, y) = ln p_t(x, y) - ln p_t(x, 0)`.
pub fn log_q(t: f64, x: &[f64], y: &[f64], kappa: &MultiplicityZ2, adaptive: &Adaptive) -> Result<f64> {
    let origin = vec![0.0; x.len()];
    Ok(log_kernel(t, x, y, kappa, adaptive)? - log_kernel(t, x, &origin, kappa, adaptive)?)
}

/// Diagonal of the `x`-Hessian of `ln q_t(x, y)`: `(y_i/2t)^2 Var_{a_i}`.
/// Off-diagonal entries vanish identically by the product structure.
pub fn log_q_hessian_diag(
    t: f64,
    x: &[f64],
    y: &[f64],
    kappa: &MultiplicityZ2,
    adaptive: &Adaptive,
) -> Result<Vec<f64>> {
    let kp = log_kernel_derivatives(t, x, y, kappa, adaptive)?;
    Ok(kp
        .coordinates
        .iter()
        .zip(y)
        .map(|(c, &yi)| match c.moments {
            Some(m) => (yi / (2.0 * t)).powi(2) * m.variance,
            None => 0.0,
        })
        .collect())
}

/// Passes iff every diagonal entry of the Hessian of `ln q_t(., y)` is
/// `>= -tolerance`.
pub fn log_convexity_check(
    t: f64,
    x: &[f64],
    y: &[f64],
    kappa: &MultiplicityZ2,
    adaptive: &Adaptive,
    tolerance: f64,
) -> Result<VerificationReport> {
    let h = log_q_hessian_diag(t, x, y, kappa, adaptive)?;
    let min = h.iter().copied().fold(f64::INFINITY, f64::min);
    VerificationReport::inequality(
        ClaimId::LogConvexity,
        GridPoint::txy(t, x, y, kappa.kappa()),
        -min,
        0.0,
        tolerance,
    )
}

/// `ln q(mid) <= (ln q(z1) + ln q(z2)) / 2`.
pub fn log_convexity_midpoint_check(
    t: f64,
    z1: &[f64],
    z2: &[f64],
    y: &[f64],
    kappa: &MultiplicityZ2,
    adaptive: &Adaptive,
    tolerance: f64,
) -> Result<VerificationReport> {
    let mid: Vec<f64> = z1.iter().zip(z2).map(|(a, b)| 0.5 * (a + b)).collect();
    let lhs = log_q(t, &mid, y, kappa, adaptive)?;
    let rhs = 0.5 * (log_q(t, z1, y, kappa, adaptive)? + log_q(t, z2, y, kappa, adaptive)?);
    let mut point = GridPoint::txy(t, &mid, y, kappa.kappa());
    point.s = None;
    VerificationReport::inequality(ClaimId::LogConvexityMidpoint, point, lhs, rhs, tolerance)
}
