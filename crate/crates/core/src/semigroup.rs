//! The weighted measure `mu_kappa`, the heat semigroup `P_t f` for product
//! initial data, and the global kernel identities (normalization, symmetry,
//! Chapman–Kolmogorov, heat equation, Gaussian upper bound).
//!
//! The measure is `dmu = prod_i |x_i|^{2 kappa_i} dx` with
//! `c_kappa = prod_i 2^{kappa_i + 1/2} Gamma(kappa_i + 1/2)`; this is the only
//! choice for which the kernel in [`crate::heat_kernel`] is Markov.
//! [`Convention::HalfExponent`] keeps the alternative weight `|x_i|^{kappa_i}`
//! with `c_kappa = prod_i Gamma(kappa_i + 1/2)` as a negative control.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::dunkl::{dunkl_laplacian, MultiplicityZ2};
use crate::error::{Error, Result};
use crate::heat_kernel::{
    coordinate_derivatives, log_e_kappa, log_kernel, log_kernel_1d, log_kernel_derivatives,
    log_kernel_upper_bound, log_normalizer_1d, KernelField,
};
use crate::quadrature::{cached_halfline_rule, cached_jacobi_rule, gauss_legendre, log_gamma, Adaptive};
use crate::report::{ClaimId, GridPoint, Relation, VerificationReport};
use crate::solution::{LogSnapshot, PositiveSolution};

/// Pass threshold for `|int p_t dmu - 1|`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-8;
/// Pass threshold for the relative Chapman–Kolmogorov error.
pub const CHAPMAN_KOLMOGOROV_TOLERANCE: f64 = 1e-6;
/// Pass threshold for the relative heat-equation residual.
pub const HEAT_RESIDUAL_TOLERANCE: f64 = 1e-7;
/// Pass threshold for `|ln p_t(x,y) - ln p_t(y,x)|`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Slack on the log-gap of the Gaussian upper bound, which is attained at `y = 0`.
pub const UPPER_BOUND_TOLERANCE: f64 = 1e-12;

/// Gaussian window half-width in units of the kernel's standard deviation.
const WINDOW_SIGMAS: f64 = 12.0;
const PANEL_NODES: usize = 20;
const MAX_PANELS: usize = 1 << 14;

/// Density exponent and normalizing constant of the reference measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `|x_i|^{2 kappa_i}`, `c = 2^{kappa + 1/2} Gamma(kappa + 1/2)`.
    #[default]
    Standard,
    /// `|x_i|^{kappa_i}`, `c = Gamma(kappa + 1/2)`.
    HalfExponent,
}

/// `mu_kappa` together with the matching kernel normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMeasure {
    pub kappa: MultiplicityZ2,
    pub convention: Convention,
}

impl WeightedMeasure {
    pub fn new(kappa: &MultiplicityZ2) -> Self {
        Self::with_convention(kappa, Convention::Standard)
    }

    pub fn with_convention(kappa: &MultiplicityZ2, convention: Convention) -> Self {
        WeightedMeasure {
            kappa: kappa.clone(),
            convention,
        }
    }

    pub fn density_exponent(&self, i: usize) -> f64 {
        match self.convention {
            Convention::Standard => 2.0 * self.kappa.get(i),
            Convention::HalfExponent => self.kappa.get(i),
        }
    }

    /// `prod_i |x_i|^{exponent_i}`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        self.kappa.check_point(x)?;
        Ok((0..x.len())
            .map(|i| {
                let e = self.density_exponent(i);
                if e == 0.0 {
                    1.0
                } else {
                    x[i].abs().powf(e)
                }
            })
            .product())
    }

    pub fn log_c_kappa_1d(&self, i: usize) -> Result<f64> {
        let k = self.kappa.get(i);
        match self.convention {
            Convention::Standard => log_normalizer_1d(k),
            Convention::HalfExponent => log_gamma(k + 0.5),
        }
    }

    pub fn log_c_kappa(&self) -> Result<f64> {
        (0..self.kappa.dim()).map(|i| self.log_c_kappa_1d(i)).sum()
    }

    pub fn c_kappa(&self) -> Result<f64> {
        Ok(self.log_c_kappa()?.exp())
    }

    /// `ln p^i_t(u, v)` normalized by this convention's constant.
    pub fn log_kernel_1d(&self, t: f64, u: f64, v: f64, i: usize, adaptive: &Adaptive) -> Result<f64> {
        let k = self.kappa.get(i);
        let shift = log_normalizer_1d(k)? - self.log_c_kappa_1d(i)?;
        Ok(log_kernel_1d(t, u, v, k, adaptive)? + shift)
    }
}

/// Composite Gauss rule for `int f(y) |y|^exponent dy` over a union of
/// intervals, none of which has `0` in its interior. Panels touching `0`
/// carry the weight in a Gauss–Jacobi rule; the rest use Gauss–Legendre.
/// Panels are halved until every component agrees to `rel_tol` relative to
/// the larger of its `L1` norm and `floor`.
struct LineQuadrature {
    exponent: f64,
    rel_tol: f64,
}

impl LineQuadrature {
    fn integrate<const K: usize>(
        &self,
        what: &'static str,
        intervals: &[(f64, f64)],
        initial_width: f64,
        floors: [f64; K],
        mut f: impl FnMut(f64) -> Result<[f64; K]>,
    ) -> Result<[f64; K]> {
        let legendre = gauss_legendre(PANEL_NODES)?;
        let right = cached_jacobi_rule(0.0, self.exponent, PANEL_NODES)?;
        let left = cached_jacobi_rule(self.exponent, 0.0, PANEL_NODES)?;
        let span: f64 = intervals.iter().map(|(lo, hi)| hi - lo).sum();
        let mut width = initial_width.min(span).max(f64::MIN_POSITIVE);
        let mut eval = |width: f64| -> Result<([f64; K], [f64; K])> {
            let mut acc = [0.0; K];
            let mut abs = [0.0; K];
            let mut add = |wt: f64, v: [f64; K]| {
                for k in 0..K {
                    acc[k] += wt * v[k];
                    abs[k] += (wt * v[k]).abs();
                }
            };
            for &(lo, hi) in intervals {
                let n = ((hi - lo) / width).ceil().max(1.0) as usize;
                let h = (hi - lo) / n as f64;
                for p in 0..n {
                    let a = lo + h * p as f64;
                    let b = if p + 1 == n { hi } else { a + h };
                    let half = 0.5 * (b - a);
                    let mid = 0.5 * (a + b);
                    if self.exponent != 0.0 && (a == 0.0 || b == 0.0) {
                        let rule = if a == 0.0 { &right } else { &left };
                        let scale = half.powf(self.exponent + 1.0);
                        for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
                            add(scale * w, f(mid + half * s)?);
                        }
                    } else {
                        for (&s, &w) in legendre.nodes.iter().zip(&legendre.weights) {
                            let y = mid + half * s;
                            let dens = if self.exponent == 0.0 { 1.0 } else { y.abs().powf(self.exponent) };
                            add(half * w * dens, f(y)?);
                        }
                    }
                }
            }
            Ok((acc, abs))
        };
        let (mut prev, _) = eval(width)?;
        loop {
            width *= 0.5;
            if span / width > MAX_PANELS as f64 {
                return Err(Error::convergence(
                    what,
                    format!("no agreement to {:e} with {MAX_PANELS} panels", self.rel_tol),
                ));
            }
            let (cur, abs) = eval(width)?;
            let done = (0..K).all(|k| (cur[k] - prev[k]).abs() <= self.rel_tol * abs[k].max(floors[k]));
            if done {
                return Ok(cur);
            }
            prev = cur;
        }
    }
}

/// Sort, merge and split a set of intervals at `0`.
fn normalize_intervals(mut raw: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    raw.retain(|(lo, hi)| hi > lo);
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in raw {
        match merged.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    let mut out = Vec::with_capacity(merged.len() + 1);
    for (lo, hi) in merged {
        if lo < 0.0 && hi > 0.0 {
            out.push((lo, 0.0));
            out.push((0.0, hi));
        } else {
            out.push((lo, hi));
        }
    }
    out
}

/// Windows of half-width `WINDOW_SIGMAS * sigma` around each centre.
fn windows(centres: &[f64], sigma: f64) -> Vec<(f64, f64)> {
    let r = WINDOW_SIGMAS * sigma;
    normalize_intervals(centres.iter().map(|&c| (c - r, c + r)).collect())
}

fn quadrature_tol(adaptive: &Adaptive) -> f64 {
    adaptive.rel_tol.min(1e-11)
}

/// `ln int p^i_t(u, v) |v|^{exponent} dv` for one coordinate.
fn log_mass_1d(measure: &WeightedMeasure, t: f64, u: f64, i: usize, adaptive: &Adaptive) -> Result<f64> {
    let kappa = measure.kappa.get(i);
    let sigma = (2.0 * t).sqrt();
    if measure.convention == Convention::Standard && kappa > 0.0 && u.abs() <= 2.0 * sigma {
        return log_mass_halfline(t, u, kappa, adaptive);
    }
    let quad = LineQuadrature {
        exponent: measure.density_exponent(i),
        rel_tol: quadrature_tol(adaptive),
    };
    let peak = measure.log_kernel_1d(t, u, u, i, adaptive)?;
    let [mass] = quad.integrate("normalization", &windows(&[u, -u], sigma), 0.5 * sigma, [0.0], |v| {
        Ok([(measure.log_kernel_1d(t, u, v, i, adaptive)? - peak).exp()])
    })?;
    Ok(mass.ln() + peak)
}

/// Generalized Gauss–Laguerre evaluation of the standard mass for `kappa > 0`:
/// `int_0^inf v^{2 kappa} e^{-v^2/4t} [E(uv/2t) + E(-uv/2t)] dv * e^{-u^2/4t} / (c (2t)^{kappa+1/2})`.
fn log_mass_halfline(t: f64, u: f64, kappa: f64, adaptive: &Adaptive) -> Result<f64> {
    let c = 1.0 / (4.0 * t);
    let tol = quadrature_tol(adaptive);
    let w = u / (2.0 * t);
    let integral = Adaptive {
        rel_tol: tol,
        start_nodes: 32,
        max_nodes: 512,
    }
    .run(
        "normalization",
        |n| {
            let rule = cached_halfline_rule(kappa, n)?;
            let mut err = None;
            let v = rule.integrate_gaussian_weight(c, |v| {
                let e = log_e_kappa(w, v, kappa, adaptive).and_then(|lp| {
                    log_e_kappa(-w, v, kappa, adaptive).map(|lm| lp.exp() + lm.exp())
                });
                e.unwrap_or_else(|e2| {
                    err.get_or_insert(e2);
                    f64::NAN
                })
            });
            match err {
                Some(e) => Err(e),
                None => Ok(v),
            }
        },
        |a, b, tol| (a - b).abs() <= tol * a.abs().max(b.abs()),
    )?;
    Ok(integral.ln() - u * u / (4.0 * t) - log_normalizer_1d(kappa)? - (kappa + 0.5) * (2.0 * t).ln())
}

/// `int p_t(x, y) dmu(y)`, which is `1` under the standard convention.
pub fn total_mass(t: f64, x: &[f64], measure: &WeightedMeasure, adaptive: &Adaptive) -> Result<f64> {
    measure.kappa.check_point(x)?;
    check_time(t)?;
    let log: f64 = (0..x.len())
        .map(|i| log_mass_1d(measure, t, x[i], i, adaptive))
        .sum::<Result<f64>>()?;
    Ok(log.exp())
}

pub fn normalization_check(
    t: f64,
    x: &[f64],
    measure: &WeightedMeasure,
    adaptive: &Adaptive,
) -> Result<VerificationReport> {
    let lhs = total_mass(t, x, measure, adaptive)?;
    VerificationReport::new(
        ClaimId::Normalization,
        GridPoint::txy(t, x, &[], measure.kappa.kappa()),
        lhs,
        1.0,
        Relation::EqAbs,
        NORMALIZATION_TOLERANCE,
    )
}

/// `int p_s(x, z) p_t(z, y) dmu(z) / p_{s+t}(x, y)`, evaluated per coordinate.
pub fn chapman_kolmogorov_ratio(
    s: f64,
    t: f64,
    x: &[f64],
    y: &[f64],
    measure: &WeightedMeasure,
    adaptive: &Adaptive,
) -> Result<f64> {
    check_time(s)?;
    check_time(t)?;
    measure.kappa.check_point(x)?;
    measure.kappa.check_point(y)?;
    let sigma = (2.0 * s * t / (s + t)).sqrt();
    let quad_tol = quadrature_tol(adaptive);
    let mut log_ratio = 0.0;
    for i in 0..x.len() {
        let (u, v) = (x[i], y[i]);
        let reference = measure.log_kernel_1d(s + t, u, v, i, adaptive)?;
        let centres: Vec<f64> = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .iter()
            .map(|(a, b)| (a * t * u + b * s * v) / (s + t))
            .collect();
        let quad = LineQuadrature {
            exponent: measure.density_exponent(i),
            rel_tol: quad_tol,
        };
        let [r] = quad.integrate("chapman-kolmogorov", &windows(&centres, sigma), 0.5 * sigma, [1.0], |z| {
            let lp = measure.log_kernel_1d(s, u, z, i, adaptive)? + measure.log_kernel_1d(t, z, v, i, adaptive)?;
            Ok([(lp - reference).exp()])
        })?;
        log_ratio += r.ln();
    }
    Ok(log_ratio.exp())
}

pub fn chapman_kolmogorov_check(
    s: f64,
    t: f64,
    x: &[f64],
    y: &[f64],
    measure: &WeightedMeasure,
    adaptive: &Adaptive,
) -> Result<VerificationReport> {
    let ratio = chapman_kolmogorov_ratio(s, t, x, y, measure, adaptive)?;
    let point = GridPoint {
        t: Some(t),
        s: Some(s),
        x: x.to_vec(),
        y: y.to_vec(),
        a: None,
        kappa: measure.kappa.kappa().to_vec(),
    };
    VerificationReport::new(
        ClaimId::ChapmanKolmogorov,
        point,
        ratio,
        1.0,
        Relation::EqRel,
        CHAPMAN_KOLMOGOROV_TOLERANCE,
    )
}

/// `|d_t p - Delta_kappa p| / max(|d_t p|, |Delta_kappa p|, p / t)`, with the
/// time derivative from the analytic formula and the Laplacian from the
/// generic Dunkl operator applied to the kernel field.
pub fn heat_residual(
    t: f64,
    x: &[f64],
    y: &[f64],
    kappa: &MultiplicityZ2,
    adaptive: &Adaptive,
) -> Result<f64> {
    let kp = log_kernel_derivatives(t, x, y, kappa, adaptive)?;
    // Normalized so that p(x) = 1.
    let field = KernelField::new(t, y, kappa, *adaptive).normalized_at(x)?;
    let lap = dunkl_laplacian(&field, x, kappa)?;
    let dt = kp.dt_log_p;
    let scale = dt.abs().max(lap.abs()).max(1.0 / t);
    Ok((dt - lap).abs() / scale)
}

pub fn heat_residual_check(
    t: f64,
    x: &[f64],
    y: &[f64],
    kappa: &MultiplicityZ2,
    adaptive: &Adaptive,
) -> Result<VerificationReport> {
    let r = heat_residual(t, x, y, kappa, adaptive)?;
    VerificationReport::inequality(
        ClaimId::HeatEquation,
        GridPoint::txy(t, x, y, kappa.kappa()),
        r,
        0.0,
        HEAT_RESIDUAL_TOLERANCE,
    )
}

pub fn symmetry_check(
    t: f64,
    x: &[f64],
    y: &[f64],
    kappa: &MultiplicityZ2,
    adaptive: &Adaptive,
) -> Result<VerificationReport> {
    let lhs = log_kernel(t, x, y, kappa, adaptive)?;
    let rhs = log_kernel(t, y, x, kappa, adaptive)?;
    VerificationReport::new(
        ClaimId::Symmetry,
        GridPoint::txy(t, x, y, kappa.kappa()),
        lhs,
        rhs,
        Relation::EqAbs,
        SYMMETRY_TOLERANCE,
    )
}

/// `ln p_t(x, y) <= ln` of the Gaussian bound with the orbit distance.
pub fn upper_bound_check(
    t: f64,
    x: &[f64],
    y: &[f64],
    kappa: &MultiplicityZ2,
    adaptive: &Adaptive,
) -> Result<VerificationReport> {
    let lhs = log_kernel(t, x, y, kappa, adaptive)?;
    let rhs = log_kernel_upper_bound(t, x, y, kappa)?;
    VerificationReport::inequality(
        ClaimId::UpperBound,
        GridPoint::txy(t, x, y, kappa.kappa()),
        lhs,
        rhs,
        UPPER_BOUND_TOLERANCE,
    )
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("time must be positive and finite, got {t}")))
    }
}

/// One-dimensional nonnegative profile with compact support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Profile {
    /// `1` on `[lo, hi]`.
    Indicator { lo: f64, hi: f64 },
    /// `exp(1 - 1/(1 - r^2))`, `r = |y - center| / radius`.
    Bump { center: f64, radius: f64 },
    /// Sum of two bumps of equal radius; not log-concave when they are apart.
    TwoBump { left: f64, right: f64, radius: f64 },
}

fn bump(y: f64, center: f64, radius: f64) -> f64 {
    let r = (y - center) / radius;
    let q = 1.0 - r * r;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

impl Profile {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Profile::Indicator { lo, hi } => lo.is_finite() && hi.is_finite() && lo < hi,
            Profile::Bump { center, radius } => center.is_finite() && radius.is_finite() && radius > 0.0,
            Profile::TwoBump { left, right, radius } => {
                left.is_finite() && right.is_finite() && radius.is_finite() && radius > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid profile {self:?}")))
        }
    }

    pub fn value(&self, y: f64) -> f64 {
        match *self {
            Profile::Indicator { lo, hi } => {
                if (lo..=hi).contains(&y) {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::Bump { center, radius } => bump(y, center, radius),
            Profile::TwoBump { left, right, radius } => bump(y, left, radius) + bump(y, right, radius),
        }
    }

    /// Intervals covering the support on each of which the profile is smooth.
    pub fn pieces(&self) -> Vec<(f64, f64)> {
        match *self {
            Profile::Indicator { lo, hi } => vec![(lo, hi)],
            Profile::Bump { center, radius } => vec![(center - radius, center + radius)],
            Profile::TwoBump { left, right, radius } => {
                let mut ends = vec![left - radius, left + radius, right - radius, right + radius];
                ends.sort_by(f64::total_cmp);
                ends.dedup();
                let (lo, hi) = (ends[0], ends[ends.len() - 1]);
                let mut out = Vec::new();
                for w in ends.windows(2) {
                    let mid = 0.5 * (w[0] + w[1]);
                    if self.value(mid) > 0.0 {
                        out.push((w[0], w[1]));
                    }
                }
                if out.is_empty() {
                    out.push((lo, hi));
                }
                out
            }
        }
    }
}

/// A product initial datum `f(x) = prod_i f_i(x_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDatum {
    pub profiles: Vec<Profile>,
}

impl InitialDatum {
    pub fn new(profiles: Vec<Profile>) -> Result<Self> {
        if profiles.is_empty() {
            return Err(Error::domain("initial datum needs at least one profile"));
        }
        for p in &profiles {
            p.validate()?;
        }
        Ok(InitialDatum { profiles })
    }

    pub fn dim(&self) -> usize {
        self.profiles.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.profiles.iter().zip(x).map(|(p, &y)| p.value(y)).product()
    }
}

/// `ln U`, `U'/U`, `U''/U - (U'/U)^2` and `d_t U / U` for one factor
/// `U(t, u) = int f_i(v) p^i_t(u, v) |v|^{2 kappa_i} dv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorDerivatives {
    pub log_value: f64,
    pub d_log: f64,
    pub dd_log: f64,
    pub dt_log: f64,
}

/// `u(t, x) = P_t f(x)` for a product datum, with analytic kernel derivatives
/// under the integral sign. One-dimensional factors are memoized.
pub struct SemigroupSolution {
    pub datum: InitialDatum,
    pub kappa: MultiplicityZ2,
    pub adaptive: Adaptive,
    cache: Mutex<HashMap<(u64, u64, usize), FactorDerivatives>>,
}

impl std::fmt::Debug for SemigroupSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemigroupSolution")
            .field("datum", &self.datum)
            .field("kappa", &self.kappa)
            .finish()
    }
}

impl SemigroupSolution {
    pub fn new(datum: InitialDatum, kappa: &MultiplicityZ2, adaptive: Adaptive) -> Result<Self> {
        if datum.dim() != kappa.dim() {
            return Err(Error::DimensionMismatch {
                expected: kappa.dim(),
                got: datum.dim(),
            });
        }
        Ok(SemigroupSolution {
            datum,
            kappa: kappa.clone(),
            adaptive,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn factor(&self, t: f64, u: f64, i: usize) -> Result<FactorDerivatives> {
        check_time(t)?;
        let key = (t.to_bits(), u.to_bits(), i);
        if let Some(v) = self.cache.lock().map_err(poisoned)?.get(&key) {
            return Ok(*v);
        }
        let v = self.compute_factor(t, u, i)?;
        self.cache.lock().map_err(poisoned)?.insert(key, v);
        Ok(v)
    }

    fn compute_factor(&self, t: f64, u: f64, i: usize) -> Result<FactorDerivatives> {
        let kappa = self.kappa.get(i);
        let profile = self.datum.profiles[i];
        let pieces = normalize_intervals(profile.pieces());
        let width = (2.0 * t).sqrt();
        let span: f64 = pieces.iter().map(|(lo, hi)| hi - lo).sum();
        let initial = (0.5 * width).min(0.25 * span);
        let quad = LineQuadrature {
            exponent: 2.0 * kappa,
            rel_tol: quadrature_tol(&self.adaptive),
        };
        let ad = &self.adaptive;
        // Shift by the largest log-kernel value on a coarse sample of the
        // support so that far-away supports do not underflow.
        let mut shift = f64::NEG_INFINITY;
        for &(lo, hi) in &pieces {
            for k in 0..=8 {
                let v = lo + (hi - lo) * k as f64 / 8.0;
                shift = shift.max(log_kernel_1d(t, u, v, kappa, ad)?);
            }
            let nearest = u.clamp(lo, hi);
            shift = shift.max(log_kernel_1d(t, u, nearest, kappa, ad)?);
        }
        let weight = |v: f64| -> Result<(f64, f64, f64, f64)> {
            let cd = coordinate_derivatives(t, u, v, kappa, ad)?;
            Ok((profile.value(v) * (cd.log_p - shift).exp(), cd.d_u, cd.d_uu, cd.d_t))
        };
        let [m0, m1, m2, mt] = quad.integrate("semigroup", &pieces, initial, [0.0, 0.0, 0.0, 0.0], |v| {
            let (w, du, duu, dt) = weight(v)?;
            Ok([w, w * du, w * duu, w * dt])
        })?;
        if !(m0 > 0.0) {
            return Err(Error::Field(format!(
                "P_t f vanished numerically at t={t}, x_{i}={u}"
            )));
        }
        let mean = m1 / m0;
        let [n0, var] = quad.integrate("semigroup", &pieces, initial, [0.0, 0.0], |v| {
            let (w, du, _, _) = weight(v)?;
            Ok([w, w * (du - mean).powi(2)])
        })?;
        Ok(FactorDerivatives {
            log_value: m0.ln() + shift,
            d_log: mean,
            dd_log: m2 / m0 + var / n0,
            dt_log: mt / m0,
        })
    }
}

fn poisoned<T>(_: std::sync::PoisonError<T>) -> Error {
    Error::Field("solution cache lock poisoned".into())
}

impl PositiveSolution for SemigroupSolution {
    fn dim(&self) -> usize {
        self.kappa.dim()
    }
    fn log_value(&self, t: f64, x: &[f64]) -> Result<f64> {
        self.kappa.check_point(x)?;
        (0..x.len()).map(|i| Ok(self.factor(t, x[i], i)?.log_value)).sum()
    }
    fn grad_log(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.kappa.check_point(x)?;
        (0..x.len()).map(|i| Ok(self.factor(t, x[i], i)?.d_log)).collect()
    }
    fn hess_diag_log(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.kappa.check_point(x)?;
        (0..x.len()).map(|i| Ok(self.factor(t, x[i], i)?.dd_log)).collect()
    }
    fn dt_log(&self, t: f64, x: &[f64]) -> Result<f64> {
        self.kappa.check_point(x)?;
        (0..x.len()).map(|i| Ok(self.factor(t, x[i], i)?.dt_log)).sum()
    }
}

/// `P_t f(x)`.
pub fn apply_semigroup(
    datum: &InitialDatum,
    t: f64,
    x: &[f64],
    kappa: &MultiplicityZ2,
    adaptive: &Adaptive,
) -> Result<f64> {
    let sol = SemigroupSolution::new(datum.clone(), kappa, *adaptive)?;
    Ok(sol.log_value(t, x)?.exp())
}

/// `-Delta_kappa ln u(t, .)(x) <= (d + 2 lambda) / (2t)` for any positive solution.
pub fn liyau_for_solution<S: PositiveSolution + ?Sized>(
    u: &S,
    t: f64,
    x: &[f64],
    kappa: &MultiplicityZ2,
    tolerance: f64,
) -> Result<VerificationReport> {
    let lhs = -dunkl_laplacian(&LogSnapshot::new(u, t), x, kappa)?;
    VerificationReport::inequality(
        ClaimId::LiyauSolution,
        GridPoint::txy(t, x, &[], kappa.kappa()),
        lhs,
        kappa.liyau_bound(t),
        tolerance,
    )
}

/// `c_kappa` recomputed as `int e^{-|x|^2/2} dmu` by generalized Gauss–Laguerre.
pub fn gaussian_moment(measure: &WeightedMeasure, n: usize) -> Result<f64> {
    let mut total = 1.0;
    for i in 0..measure.kappa.dim() {
        let e = measure.density_exponent(i);
        let rule = cached_halfline_rule(0.5 * e, n)?;
        total *= 2.0 * rule.integrate_gaussian_weight(0.5, |_| 1.0);
    }
    Ok(total)
}

/// Closed-form heat flow of an indicator for `kappa = 0`:
/// `(erf((hi - x)/(2 sqrt t)) - erf((lo - x)/(2 sqrt t))) / 2`.
pub fn gaussian_indicator_flow(lo: f64, hi: f64, t: f64, x: f64) -> f64 {
    use statrs::function::erf::erfc;
    let s = 2.0 * t.sqrt();
    // Difference of complementary error functions on the side that keeps
    // both arguments positive, to avoid cancellation.
    if x <= 0.5 * (lo + hi) {
        0.5 * (erfc((lo - x) / s) - erfc((hi - x) / s))
    } else {
        0.5 * (erfc((x - hi) / s) - erfc((x - lo) / s))
    }
}
