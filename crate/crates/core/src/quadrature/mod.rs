//! Gaussian quadrature for the Jacobi weight `(1 - s)^alpha (1 + s)^beta` on
//! `[-1, 1]` and the generalized Laguerre weight `u^gamma e^{-u}` on
//! `[0, inf)`.
//!
//! Nodes are eigenvalues of the Jacobi (recurrence) matrix. Weights are the
//! Christoffel numbers `mu_0 / sum_k p_k(x_j)^2` evaluated with a rescaled
//! three-term recurrence, which keeps full relative accuracy for the tiny
//! weights next to an endpoint singularity.
//!
//! Rules are cached process-wide keyed on parameters rounded to 15
//! significant digits; a cached rule is never mutated.

mod tridiagonal;

pub use tridiagonal::symmetric_tridiagonal_eigenvalues;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

/// Default initial order of adaptive node doubling.
pub const DEFAULT_START_NODES: usize = 32;
/// Default cap on the number of nodes for adaptive doubling.
pub const DEFAULT_MAX_NODES: usize = 4096;
/// Default relative tolerance for adaptive doubling.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// `ln Gamma(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// `ln B(a, b)` for `a, b > 0`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// Gauss rule for `int_{-1}^{1} f(s) (1 - s)^alpha (1 + s)^beta ds`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiRule {
    pub alpha: f64,
    pub beta: f64,
    pub order: usize,
    /// Strictly increasing, inside `(-1, 1)`.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl JacobiRule {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(s))
            .sum()
    }

    /// `int_{-1}^{1} (1 - s)^alpha (1 + s)^beta ds`, as represented by the rule.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Integrate `f` against the weight after mapping `[-1, 1]` affinely onto
    /// `[lo, hi]`. The weight is *not* rescaled: the caller gets
    /// `(hi - lo)/2 * sum w_j f(x_j)`.
    pub fn integrate_on(&self, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        half * self.integrate(|s| f(mid + half * s))
    }
}

/// Generalized Gauss–Laguerre rule for `int_0^inf f(u) u^exponent e^{-u} du`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalflineRule {
    pub exponent: f64,
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl HalflineRule {
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&u, &w)| w * f(u))
            .sum()
    }

    /// `int_0^inf y^{2 kappa} e^{-c y^2} f(y) dy` with `kappa = exponent + 1/2`,
    /// through the substitution `u = c y^2`.
    pub fn integrate_gaussian_weight(&self, c: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let kappa = self.exponent + 0.5;
        0.5 * c.powf(-kappa - 0.5) * self.integrate(|u| f((u / c).sqrt()))
    }
}

/// Three-term recurrence of a family of monic orthogonal polynomials:
/// `p_{k+1} = (x - diag[k]) p_k - off_sq[k] p_{k-1}` with `off_sq[0]` unused,
/// plus the total mass `ln mu_0` of the weight.
struct Recurrence {
    diag: Vec<f64>,
    off: Vec<f64>,
    log_mu0: f64,
}

fn jacobi_recurrence(alpha: f64, beta: f64, n: usize) -> Result<Recurrence> {
    let ab = alpha + beta;
    let mut diag = Vec::with_capacity(n);
    let mut off = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let kf = k as f64;
        let a = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            let s = 2.0 * kf + ab;
            (beta * beta - alpha * alpha) / (s * (s + 2.0))
        };
        diag.push(a);
    }
    for k in 1..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let b = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab).powi(2) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + alpha) * (kf + beta) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
        off.push(b.sqrt());
    }
    let log_mu0 = (ab + 1.0) * std::f64::consts::LN_2 + log_beta(alpha + 1.0, beta + 1.0)?;
    Ok(Recurrence {
        diag,
        off,
        log_mu0,
    })
}

fn laguerre_recurrence(gamma: f64, n: usize) -> Result<Recurrence> {
    let diag = (0..n).map(|k| 2.0 * k as f64 + gamma + 1.0).collect();
    let off = (1..n)
        .map(|k| (k as f64 * (k as f64 + gamma)).sqrt())
        .collect();
    Ok(Recurrence {
        diag,
        off,
        log_mu0: log_gamma(gamma + 1.0)?,
    })
}

/// `ln sum_{k<n} p_k(x)^2` for the orthonormal-recurrence polynomials with
/// `p_0 = 1`, rescaling on the fly so large arguments cannot overflow.
fn log_christoffel_sum(rec: &Recurrence, x: f64) -> f64 {
    const BIG: f64 = 1e150;
    let n = rec.diag.len();
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut sum = 1.0;
    let mut log_scale = 0.0;
    for k in 0..n - 1 {
        let back = if k == 0 { 0.0 } else { rec.off[k - 1] * prev };
        let next = ((x - rec.diag[k]) * cur - back) / rec.off[k];
        prev = cur;
        cur = next;
        sum += cur * cur;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            sum /= BIG * BIG;
            log_scale += 2.0 * BIG.ln();
        }
    }
    sum.ln() + log_scale
}

fn build_rule(rec: &Recurrence) -> Result<(Vec<f64>, Vec<f64>)> {
    let nodes = symmetric_tridiagonal_eigenvalues(&rec.diag, &rec.off)?;
    let weights = nodes
        .iter()
        .map(|&x| (rec.log_mu0 - log_christoffel_sum(rec, x)).exp())
        .collect();
    Ok((nodes, weights))
}

/// Gauss–Jacobi rule with `n` nodes (uncached).
pub fn gauss_jacobi_rule(alpha: f64, beta: f64, n: usize) -> Result<JacobiRule> {
    if !(alpha > -1.0) || !(beta > -1.0) {
        return Err(Error::domain(format!(
            "Jacobi exponents must exceed -1, got alpha={alpha}, beta={beta}"
        )));
    }
    if n == 0 {
        return Err(Error::domain("quadrature order must be positive"));
    }
    let rec = jacobi_recurrence(alpha, beta, n)?;
    let (mut nodes, weights) = build_rule(&rec)?;
    for s in &mut nodes {
        // Rounding can push an eigenvalue onto an endpoint for huge n.
        *s = s.clamp(-1.0 + f64::EPSILON, 1.0 - f64::EPSILON / 2.0);
    }
    Ok(JacobiRule {
        alpha,
        beta,
        order: n,
        nodes,
        weights,
    })
}

/// Gauss–Legendre rule (`alpha = beta = 0`), cached.
pub fn gauss_legendre(n: usize) -> Result<Arc<JacobiRule>> {
    cached_jacobi_rule(0.0, 0.0, n)
}

/// Generalized Gauss–Laguerre rule with parameter `kappa - 1/2` (uncached).
///
/// After `u = c y^2` it integrates `int_0^inf y^{2 kappa} e^{-c y^2} f(y) dy`;
/// see [`HalflineRule::integrate_gaussian_weight`].
pub fn halfline_rule(kappa: f64, n: usize) -> Result<HalflineRule> {
    if !(kappa > -0.5) || !kappa.is_finite() {
        return Err(Error::domain(format!("halfline rule needs kappa > -1/2, got {kappa}")));
    }
    if n == 0 {
        return Err(Error::domain("quadrature order must be positive"));
    }
    let exponent = kappa - 0.5;
    let rec = laguerre_recurrence(exponent, n)?;
    let (nodes, weights) = build_rule(&rec)?;
    Ok(HalflineRule {
        exponent,
        order: n,
        nodes,
        weights,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum RuleKey {
    Jacobi(u64, u64, usize),
    Halfline(u64, usize),
}

fn round_15(x: f64) -> u64 {
    format!("{x:.14e}").parse::<f64>().unwrap_or(x).to_bits()
}

type Cache<T> = RwLock<HashMap<RuleKey, Arc<T>>>;

fn jacobi_cache() -> &'static Cache<JacobiRule> {
    static CACHE: OnceLock<Cache<JacobiRule>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn halfline_cache() -> &'static Cache<HalflineRule> {
    static CACHE: OnceLock<Cache<HalflineRule>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn cached<T>(
    cache: &'static Cache<T>,
    key: RuleKey,
    build: impl FnOnce() -> Result<T>,
) -> Result<Arc<T>> {
    if let Some(rule) = cache.read().expect("rule cache poisoned").get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(build()?);
    let mut guard = cache.write().expect("rule cache poisoned");
    Ok(Arc::clone(guard.entry(key).or_insert(rule)))
}

/// Cached [`gauss_jacobi_rule`].
pub fn cached_jacobi_rule(alpha: f64, beta: f64, n: usize) -> Result<Arc<JacobiRule>> {
    let key = RuleKey::Jacobi(round_15(alpha), round_15(beta), n);
    cached(jacobi_cache(), key, || gauss_jacobi_rule(alpha, beta, n))
}

/// Cached [`halfline_rule`].
pub fn cached_halfline_rule(kappa: f64, n: usize) -> Result<Arc<HalflineRule>> {
    let key = RuleKey::Halfline(round_15(kappa), n);
    cached(halfline_cache(), key, || halfline_rule(kappa, n))
}

/// Node-doubling controls shared by every adaptive integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive {
    pub rel_tol: f64,
    pub start_nodes: usize,
    pub max_nodes: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive {
            rel_tol: DEFAULT_REL_TOL,
            start_nodes: DEFAULT_START_NODES,
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

impl Adaptive {
    pub fn with_tol(rel_tol: f64) -> Self {
        Adaptive {
            rel_tol,
            ..Default::default()
        }
    }

    /// Evaluate at `n, 2n, 4n, ...` until `converged(previous, current)`,
    /// returning the finer result. Reaching `max_nodes` without convergence
    /// is an error.
    pub fn run<T>(
        &self,
        what: &'static str,
        mut eval: impl FnMut(usize) -> Result<T>,
        mut converged: impl FnMut(&T, &T, f64) -> bool,
    ) -> Result<T> {
        let mut n = self.start_nodes.max(1);
        let mut prev = eval(n)?;
        while 2 * n <= self.max_nodes {
            n *= 2;
            let cur = eval(n)?;
            if converged(&prev, &cur, self.rel_tol) {
                return Ok(cur);
            }
            prev = cur;
        }
        Err(Error::convergence(
            what,
            format!(
                "no agreement to {:e} before the {}-node cap",
                self.rel_tol, self.max_nodes
            ),
        ))
    }
}

/// `|a - b| <= tol * max(|a|, |b|, floor)`.
pub fn rel_close(a: f64, b: f64, tol: f64, floor: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(floor)
}
