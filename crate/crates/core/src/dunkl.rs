//! Reflections, multiplicities and Dunkl operators for the reflection group
//! `Z_2^d` (independent sign flips of the coordinates).
//!
//! With positive roots `sqrt(2) e_i` the Dunkl derivative and Laplacian read
//!
//! ```text
//! D_i f(x)   = d_i f(x) + kappa_i / x_i * (f(x) - f(r_i x))
//! L_k f(x)   = sum_i d_ii f(x) + kappa_i / x_i^2 * (2 x_i d_i f(x) - f(x) + f(r_i x))
//! ```
//!
//! On a reflection hyperplane (`|x_i|` below [`DEFAULT_EPS_REFL`]`*(1+|x|)`) the
//! difference quotients are replaced by their removable-singularity limits.
//! Coordinates are 0-based throughout.

use crate::error::{Error, Result};

/// Relative threshold below which `x_i` is treated as lying on the mirror
/// `x_i = 0`.
pub const DEFAULT_EPS_REFL: f64 = 1e-7;

/// Nonnegative multiplicities `(kappa_1, ..., kappa_d)`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MultiplicityZ2 {
    kappa: Vec<f64>,
}

impl MultiplicityZ2 {
    pub fn new(kappa: Vec<f64>) -> Result<Self> {
        if kappa.is_empty() {
            return Err(Error::domain("multiplicity vector must have dimension >= 1"));
        }
        if let Some(k) = kappa.iter().find(|k| !(**k >= 0.0) || !k.is_finite()) {
            return Err(Error::domain(format!("multiplicities must be finite and >= 0, got {k}")));
        }
        Ok(MultiplicityZ2 { kappa })
    }

    /// All coordinates share the multiplicity `kappa`.
    pub fn uniform(dim: usize, kappa: f64) -> Result<Self> {
        Self::new(vec![kappa; dim])
    }

    pub fn dim(&self) -> usize {
        self.kappa.len()
    }

    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn get(&self, i: usize) -> f64 {
        self.kappa[i]
    }

    /// `lambda_kappa = sum_i kappa_i`.
    pub fn lambda(&self) -> f64 {
        self.kappa.iter().sum()
    }

    /// `d + 2 lambda_kappa`.
    pub fn homogeneous_dimension(&self) -> f64 {
        self.dim() as f64 + 2.0 * self.lambda()
    }

    /// The Li–Yau right-hand side `(d + 2 lambda_kappa) / (2t)`.
    pub fn liyau_bound(&self, t: f64) -> f64 {
        self.homogeneous_dimension() / (2.0 * t)
    }

    pub fn root_system(&self) -> RootSystemZ2 {
        RootSystemZ2::new(self)
    }

    pub(crate) fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// A positive root `sqrt(2) e_i` together with its multiplicity.
#[derive(Debug, Clone, PartialEq)]
pub struct Root {
    pub axis: usize,
    pub vector: Vec<f64>,
    pub multiplicity: f64,
}

/// Positive roots `{ sqrt(2) e_i : kappa_i > 0 }`, normalized to `|alpha|^2 = 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSystemZ2 {
    dim: usize,
    roots: Vec<Root>,
}

impl RootSystemZ2 {
    pub fn new(kappa: &MultiplicityZ2) -> Self {
        let dim = kappa.dim();
        let roots = kappa
            .kappa()
            .iter()
            .enumerate()
            .filter(|(_, k)| **k > 0.0)
            .map(|(axis, &k)| {
                let mut vector = vec![0.0; dim];
                vector[axis] = std::f64::consts::SQRT_2;
                Root {
                    axis,
                    vector,
                    multiplicity: k,
                }
            })
            .collect();
        RootSystemZ2 { dim, roots }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn positive_roots(&self) -> &[Root] {
        &self.roots
    }

    /// Mirror reflection `x - 2 <alpha, x> / |alpha|^2 alpha`.
    pub fn reflect_along(alpha: &[f64], x: &[f64]) -> Vec<f64> {
        let norm2: f64 = alpha.iter().map(|a| a * a).sum();
        let c = 2.0 * dot(alpha, x) / norm2;
        x.iter().zip(alpha).map(|(xi, ai)| xi - c * ai).collect()
    }

    /// The full root set `R = R_+ ∪ -R_+`.
    pub fn all_roots(&self) -> Vec<Vec<f64>> {
        self.roots
            .iter()
            .flat_map(|r| [r.vector.clone(), r.vector.iter().map(|v| -v).collect()])
            .collect()
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `r_i x`: `x` with coordinate `i` negated.
pub fn reflect(x: &[f64], i: usize) -> Result<Vec<f64>> {
    if i >= x.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            dim: x.len(),
        });
    }
    let mut y = x.to_vec();
    y[i] = -y[i];
    Ok(y)
}

/// Whether `x` is close enough to the mirror `x_i = 0` to use limit formulas.
pub fn is_on_hyperplane(x: &[f64], i: usize) -> bool {
    x[i].abs() < DEFAULT_EPS_REFL * (1.0 + norm(x))
}

/// A `C^2` function on `R^d` with analytic first derivatives and
/// Hessian diagonal.
pub trait ScalarField {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn hessian_diag(&self, x: &[f64]) -> Result<Vec<f64>>;
}

impl<F: ScalarField + ?Sized> ScalarField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).gradient(x)
    }
    fn hessian_diag(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).hessian_diag(x)
    }
}

type PointFn<T> = Box<dyn Fn(&[f64]) -> T + Send + Sync>;

/// A [`ScalarField`] assembled from closures.
pub struct FnField {
    dim: usize,
    value: PointFn<f64>,
    gradient: PointFn<Vec<f64>>,
    hessian_diag: PointFn<Vec<f64>>,
}

impl FnField {
    pub fn new(
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        hessian_diag: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        FnField {
            dim,
            value: Box::new(value),
            gradient: Box::new(gradient),
            hessian_diag: Box::new(hessian_diag),
        }
    }
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Field(format!("{what} is not finite ({v})")))
    }
}

fn finite_vec(v: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::Field(format!("{what} has non-finite entries")))
    }
}

impl ScalarField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        finite((self.value)(x), "value")
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        finite_vec((self.gradient)(x), "gradient")
    }
    fn hessian_diag(&self, x: &[f64]) -> Result<Vec<f64>> {
        finite_vec((self.hessian_diag)(x), "hessian diagonal")
    }
}

/// Central-difference derivatives of a plain function.
///
/// Errors are `O(h^2)` plus rounding of order `eps / h^2` on the Hessian;
/// prefer analytic fields for verification work.
pub struct FiniteDifferenceField<F> {
    dim: usize,
    f: F,
    step: f64,
}

impl<F: Fn(&[f64]) -> f64> FiniteDifferenceField<F> {
    pub fn new(dim: usize, f: F, step: f64) -> Self {
        FiniteDifferenceField { dim, f, step }
    }
}

impl<F: Fn(&[f64]) -> f64> ScalarField for FiniteDifferenceField<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        finite((self.f)(x), "value")
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let h = self.step;
        let mut y = x.to_vec();
        (0..self.dim)
            .map(|i| {
                y[i] = x[i] + h;
                let up = (self.f)(&y);
                y[i] = x[i] - h;
                let down = (self.f)(&y);
                y[i] = x[i];
                finite((up - down) / (2.0 * h), "difference gradient")
            })
            .collect()
    }
    fn hessian_diag(&self, x: &[f64]) -> Result<Vec<f64>> {
        let h = self.step;
        let mid = (self.f)(x);
        let mut y = x.to_vec();
        (0..self.dim)
            .map(|i| {
                y[i] = x[i] + h;
                let up = (self.f)(&y);
                y[i] = x[i] - h;
                let down = (self.f)(&y);
                y[i] = x[i];
                finite((up - 2.0 * mid + down) / (h * h), "difference hessian")
            })
            .collect()
    }
}

/// A `C^2` scalar function `psi` with its first two derivatives.
pub trait Psi {
    fn value(&self, s: f64) -> f64;
    fn d1(&self, s: f64) -> f64;
    fn d2(&self, s: f64) -> f64;
    fn in_domain(&self, _s: f64) -> bool {
        true
    }
}

/// The test functions used throughout the verification suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StdPsi {
    Log,
    Exp,
    Square,
    Cube,
    Affine { slope: f64, offset: f64 },
}

impl Psi for StdPsi {
    fn value(&self, s: f64) -> f64 {
        match *self {
            StdPsi::Log => s.ln(),
            StdPsi::Exp => s.exp(),
            StdPsi::Square => s * s,
            StdPsi::Cube => s * s * s,
            StdPsi::Affine { slope, offset } => slope * s + offset,
        }
    }
    fn d1(&self, s: f64) -> f64 {
        match *self {
            StdPsi::Log => 1.0 / s,
            StdPsi::Exp => s.exp(),
            StdPsi::Square => 2.0 * s,
            StdPsi::Cube => 3.0 * s * s,
            StdPsi::Affine { slope, .. } => slope,
        }
    }
    fn d2(&self, s: f64) -> f64 {
        match *self {
            StdPsi::Log => -1.0 / (s * s),
            StdPsi::Exp => s.exp(),
            StdPsi::Square => 2.0,
            StdPsi::Cube => 6.0 * s,
            StdPsi::Affine { .. } => 0.0,
        }
    }
    fn in_domain(&self, s: f64) -> bool {
        match self {
            StdPsi::Log => s > 0.0,
            _ => true,
        }
    }
}

/// `psi(a) - psi(b) - psi'(b) (a - b)`.
pub fn bregman<P: Psi + ?Sized>(psi: &P, a: f64, b: f64) -> f64 {
    psi.value(a) - psi.value(b) - psi.d1(b) * (a - b)
}

/// The composition `psi ∘ f` as a field, with chain-rule derivatives.
pub struct Composed<F, P> {
    pub field: F,
    pub psi: P,
}

impl<F: ScalarField, P: Psi> Composed<F, P> {
    pub fn new(field: F, psi: P) -> Self {
        Composed { field, psi }
    }

    fn inner(&self, x: &[f64]) -> Result<f64> {
        let v = self.field.value(x)?;
        if !self.psi.in_domain(v) {
            return Err(Error::Field(format!("value {v} outside the domain of psi")));
        }
        Ok(v)
    }
}

impl<F: ScalarField, P: Psi> ScalarField for Composed<F, P> {
    fn dim(&self) -> usize {
        self.field.dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        finite(self.psi.value(self.inner(x)?), "psi(f)")
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d1 = self.psi.d1(self.inner(x)?);
        finite_vec(
            self.field.gradient(x)?.into_iter().map(|g| d1 * g).collect(),
            "gradient of psi(f)",
        )
    }
    fn hessian_diag(&self, x: &[f64]) -> Result<Vec<f64>> {
        let v = self.inner(x)?;
        let (d1, d2) = (self.psi.d1(v), self.psi.d2(v));
        let g = self.field.gradient(x)?;
        let h = self.field.hessian_diag(x)?;
        finite_vec(
            g.iter().zip(&h).map(|(gi, hi)| d2 * gi * gi + d1 * hi).collect(),
            "hessian of psi(f)",
        )
    }
}

fn check_field<F: ScalarField + ?Sized>(f: &F, x: &[f64], kappa: &MultiplicityZ2) -> Result<()> {
    kappa.check_point(x)?;
    if f.dim() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: x.len(),
        });
    }
    Ok(())
}

/// `D_i f(x)`.
pub fn dunkl_derivative<F: ScalarField + ?Sized>(
    f: &F,
    x: &[f64],
    i: usize,
    kappa: &MultiplicityZ2,
) -> Result<f64> {
    check_field(f, x, kappa)?;
    if i >= x.len() {
        return Err(Error::IndexOutOfRange {
            index: i,
            dim: x.len(),
        });
    }
    let k = kappa.get(i);
    let di = f.gradient(x)?[i];
    if k == 0.0 {
        return Ok(di);
    }
    if is_on_hyperplane(x, i) {
        // (f(x) - f(r_i x)) / x_i -> 2 d_i f on the mirror.
        return Ok((1.0 + 2.0 * k) * di);
    }
    let diff = f.value(x)? - f.value(&reflect(x, i)?)?;
    Ok(di + k / x[i] * diff)
}

/// Per-coordinate contributions `d_ii f + kappa_i/x_i^2 (2 x_i d_i f - f + f∘r_i)`
/// of the Dunkl Laplacian; their sum is [`dunkl_laplacian`].
pub fn dunkl_laplacian_terms<F: ScalarField + ?Sized>(
    f: &F,
    x: &[f64],
    kappa: &MultiplicityZ2,
) -> Result<Vec<f64>> {
    check_field(f, x, kappa)?;
    let grad = f.gradient(x)?;
    let hess = f.hessian_diag(x)?;
    let mut value = None;
    let mut terms = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let k = kappa.get(i);
        let term = if k == 0.0 {
            hess[i]
        } else if is_on_hyperplane(x, i) {
            (1.0 + 2.0 * k) * hess[i]
        } else {
            let v = match value {
                Some(v) => v,
                None => {
                    let v = f.value(x)?;
                    value = Some(v);
                    v
                }
            };
            let reflected = f.value(&reflect(x, i)?)?;
            hess[i] + k / (x[i] * x[i]) * (2.0 * x[i] * grad[i] - v + reflected)
        };
        terms.push(term);
    }
    Ok(terms)
}

/// `Delta_kappa f(x)`.
pub fn dunkl_laplacian<F: ScalarField + ?Sized>(
    f: &F,
    x: &[f64],
    kappa: &MultiplicityZ2,
) -> Result<f64> {
    Ok(dunkl_laplacian_terms(f, x, kappa)?.iter().sum())
}

/// The nonlocal chain-rule correction
/// `Pi_psi(f)(x) = sum_i kappa_i / x_i^2 * bregman_psi(f(r_i x), f(x))`.
///
/// On the mirror `x_i = 0` the `i`-th term is `2 kappa_i psi''(f) (d_i f)^2`.
pub fn pi_psi<F: ScalarField + ?Sized, P: Psi + ?Sized>(
    f: &F,
    psi: &P,
    x: &[f64],
    kappa: &MultiplicityZ2,
) -> Result<f64> {
    check_field(f, x, kappa)?;
    let v = f.value(x)?;
    let mut grad = None;
    let mut total = 0.0;
    for i in 0..x.len() {
        let k = kappa.get(i);
        if k == 0.0 {
            continue;
        }
        if is_on_hyperplane(x, i) {
            if grad.is_none() {
                grad = Some(f.gradient(x)?);
            }
            let g = grad.as_deref().unwrap_or_default();
            total += 2.0 * k * psi.d2(v) * g[i] * g[i];
        } else {
            let reflected = f.value(&reflect(x, i)?)?;
            total += k / (x[i] * x[i]) * bregman(psi, reflected, v);
        }
    }
    Ok(total)
}

/// Both sides of the Dunkl chain rule
/// `Delta_kappa psi(f) = psi'(f) Delta_kappa f + psi''(f) |grad f|^2 + Pi_psi(f)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainRuleResidual {
    pub lhs: f64,
    pub psi_prime_term: f64,
    pub psi_second_term: f64,
    pub pi_term: f64,
    pub residual: f64,
}

impl ChainRuleResidual {
    /// Largest magnitude among the individual terms.
    pub fn scale(&self) -> f64 {
        [self.lhs, self.psi_prime_term, self.psi_second_term, self.pi_term]
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `|residual| / scale`, or `|residual|` when every term vanishes.
    pub fn relative(&self) -> f64 {
        let s = self.scale();
        if s > 0.0 {
            self.residual.abs() / s
        } else {
            self.residual.abs()
        }
    }
}

pub fn chain_rule_residual<F: ScalarField, P: Psi + Copy>(
    f: &F,
    psi: P,
    x: &[f64],
    kappa: &MultiplicityZ2,
) -> Result<ChainRuleResidual> {
    let composed = Composed::new(f, psi);
    let lhs = dunkl_laplacian(&composed, x, kappa)?;
    let v = f.value(x)?;
    let grad = f.gradient(x)?;
    let psi_prime_term = psi.d1(v) * dunkl_laplacian(f, x, kappa)?;
    let psi_second_term = psi.d2(v) * dot(&grad, &grad);
    let pi_term = pi_psi(f, &psi, x, kappa)?;
    Ok(ChainRuleResidual {
        lhs,
        psi_prime_term,
        psi_second_term,
        pi_term,
        residual: lhs - (psi_prime_term + psi_second_term + pi_term),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity_1d() -> FnField {
        FnField::new(1, |x| x[0], |_| vec![1.0], |_| vec![0.0])
    }

    fn square_1d() -> FnField {
        FnField::new(1, |x| x[0] * x[0], |x| vec![2.0 * x[0]], |_| vec![2.0])
    }

    /// A non-even field on R^2: f = exp(0.3 x + 0.2 y) + x^2 y.
    fn mixed_2d() -> FnField {
        FnField::new(
            2,
            |x| (0.3 * x[0] + 0.2 * x[1]).exp() + x[0] * x[0] * x[1],
            |x| {
                let e = (0.3 * x[0] + 0.2 * x[1]).exp();
                vec![0.3 * e + 2.0 * x[0] * x[1], 0.2 * e + x[0] * x[0]]
            },
            |x| {
                let e = (0.3 * x[0] + 0.2 * x[1]).exp();
                vec![0.09 * e + 2.0 * x[1], 0.04 * e]
            },
        )
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(reflect(&[1.0, 2.0], 0).unwrap(), vec![-1.0, 2.0]);
        assert_eq!(reflect(&[0.0, 3.0], 0).unwrap(), vec![0.0, 3.0]);
        assert!(matches!(
            reflect(&[1.0, 2.0], 2),
            Err(Error::IndexOutOfRange { index: 2, dim: 2 })
        ));
    }

    #[test]
    fn multiplicity_validation() {
        assert!(MultiplicityZ2::new(vec![]).is_err());
        assert!(MultiplicityZ2::new(vec![0.5, -0.1]).is_err());
        assert!(MultiplicityZ2::new(vec![f64::NAN]).is_err());
        let k = MultiplicityZ2::new(vec![0.5, 1.5, 0.0]).unwrap();
        assert_eq!(k.lambda(), 2.0);
        assert_eq!(k.homogeneous_dimension(), 7.0);
    }

    #[test]
    fn root_system_normalization_and_closure() {
        let k = MultiplicityZ2::new(vec![0.5, 0.0, 2.0]).unwrap();
        let rs = k.root_system();
        assert_eq!(rs.positive_roots().len(), 2);
        let all = rs.all_roots();
        for alpha in &all {
            assert!((dot(alpha, alpha) - 2.0).abs() < 1e-15);
            // r_alpha(R) = R.
            for beta in &all {
                let image = RootSystemZ2::reflect_along(alpha, beta);
                assert!(all
                    .iter()
                    .any(|g| g.iter().zip(&image).all(|(a, b)| (a - b).abs() < 1e-15)));
            }
        }
    }

    #[test]
    fn root_pairing_matches_coordinate_form() {
        // 2 kappa / <alpha, x>^2 == kappa / x_i^2 and the root reflection is r_i.
        let k = MultiplicityZ2::new(vec![0.7, 1.3]).unwrap();
        let x = [0.4, -1.1];
        for root in k.root_system().positive_roots() {
            let pairing = dot(&root.vector, &x);
            assert!((pairing * pairing - 2.0 * x[root.axis].powi(2)).abs() < 1e-15);
            let lhs = 2.0 * root.multiplicity / (pairing * pairing);
            let rhs = root.multiplicity / (x[root.axis] * x[root.axis]);
            assert!((lhs - rhs).abs() < 1e-12 * rhs);
            let r = RootSystemZ2::reflect_along(&root.vector, &x);
            let ri = reflect(&x, root.axis).unwrap();
            assert!(r.iter().zip(&ri).all(|(a, b)| (a - b).abs() < 1e-15));
        }
    }

    #[test]
    fn derivative_of_identity() {
        for kappa in [0.0, 0.25, 1.0, 2.5] {
            let k = MultiplicityZ2::new(vec![kappa]).unwrap();
            for u in [-3.0, -0.2, 0.7, 5.0] {
                let d = dunkl_derivative(&identity_1d(), &[u], 0, &k).unwrap();
                assert!((d - (1.0 + 2.0 * kappa)).abs() < 1e-14);
            }
            // Limit branch on the mirror.
            let d = dunkl_derivative(&identity_1d(), &[0.0], 0, &k).unwrap();
            assert!((d - (1.0 + 2.0 * kappa)).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_even_function_is_partial() {
        let k = MultiplicityZ2::new(vec![1.7]).unwrap();
        for u in [-2.0, 0.3, 1.9] {
            let d = dunkl_derivative(&square_1d(), &[u], 0, &k).unwrap();
            assert!((d - 2.0 * u).abs() < 1e-13);
        }
    }

    #[test]
    fn laplacian_examples() {
        for kappa in [0.0, 0.5, 1.25] {
            let k = MultiplicityZ2::new(vec![kappa]).unwrap();
            for u in [-2.0, -0.5, 0.0, 0.1, 3.0] {
                let lin = dunkl_laplacian(&identity_1d(), &[u], &k).unwrap();
                assert!(lin.abs() < 1e-13, "u={u} lin={lin}");
                let sq = dunkl_laplacian(&square_1d(), &[u], &k).unwrap();
                assert!((sq - (2.0 + 4.0 * kappa)).abs() < 1e-12, "u={u} sq={sq}");
            }
        }
    }

    #[test]
    fn zero_multiplicity_reduces_to_classical_operators() {
        let f = mixed_2d();
        let k = MultiplicityZ2::new(vec![0.0, 0.0]).unwrap();
        for x in [[0.3, -1.2], [2.0, 0.5], [-0.7, 0.0]] {
            let lap = dunkl_laplacian(&f, &x, &k).unwrap();
            let classical: f64 = f.hessian_diag(&x).unwrap().iter().sum();
            assert!((lap - classical).abs() < 1e-10);
            for i in 0..2 {
                let d = dunkl_derivative(&f, &x, i, &k).unwrap();
                assert!((d - f.gradient(&x).unwrap()[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn hyperplane_continuity() {
        // The off-mirror quotient approaches the limit value with order >= 1.
        let f = mixed_2d();
        let k = MultiplicityZ2::new(vec![0.8, 0.4]).unwrap();
        let limit = dunkl_laplacian(&f, &[0.0, 0.7], &k).unwrap();
        let errs: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&d| (dunkl_laplacian(&f, &[d, 0.7], &k).unwrap() - limit).abs())
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log10();
            assert!(order >= 0.9, "errors {errs:?}");
        }
    }

    #[test]
    fn pi_psi_signs() {
        let f = mixed_2d();
        let k = MultiplicityZ2::new(vec![0.6, 1.1]).unwrap();
        let affine = StdPsi::Affine {
            slope: 3.0,
            offset: -1.0,
        };
        for x in [[0.5, -0.4], [1.5, 0.2], [-2.0, 0.1], [0.0, 1.0]] {
            assert!(pi_psi(&f, &affine, &x, &k).unwrap().abs() < 1e-12);
            assert!(pi_psi(&f, &StdPsi::Log, &x, &k).unwrap() <= 0.0);
            assert!(pi_psi(&f, &StdPsi::Square, &x, &k).unwrap() >= 0.0);
        }
    }

    #[test]
    fn pi_psi_limit_matches_nearby_quotients() {
        let f = mixed_2d();
        let k = MultiplicityZ2::new(vec![0.9, 0.0]).unwrap();
        let limit = pi_psi(&f, &StdPsi::Exp, &[0.0, 0.4], &k).unwrap();
        let near = pi_psi(&f, &StdPsi::Exp, &[1e-4, 0.4], &k).unwrap();
        assert!((limit - near).abs() < 1e-3 * limit.abs(), "{limit} vs {near}");
    }

    #[test]
    fn chain_rule_hand_example() {
        // f = x^2, psi = exp, kappa = 0.7 at x = 1.3:
        // Delta_k e^{x^2} = e^{x^2} (2 + 4 x^2 + 4 kappa).
        let k = MultiplicityZ2::new(vec![0.7]).unwrap();
        let x = 1.3_f64;
        let r = chain_rule_residual(&square_1d(), StdPsi::Exp, &[x], &k).unwrap();
        let hand = (x * x).exp() * (2.0 + 4.0 * x * x + 4.0 * 0.7);
        assert!((r.lhs - hand).abs() < 1e-12 * hand);
        assert!(r.relative() < 1e-8);
        assert_eq!(r.pi_term, 0.0);
    }

    #[test]
    fn chain_rule_linear_psi_vanishes() {
        let k = MultiplicityZ2::new(vec![0.3, 2.0]).unwrap();
        let psi = StdPsi::Affine {
            slope: -2.0,
            offset: 0.5,
        };
        let r = chain_rule_residual(&mixed_2d(), psi, &[0.8, -1.4], &k).unwrap();
        assert!(r.relative() < 1e-12);
    }

    #[test]
    fn even_field_has_drift_form_chain_rule() {
        // For f even in every coordinate Pi_psi vanishes and
        // Delta_k psi(f) = psi'(f) (Delta f + sum 2 kappa_i d_i f / x_i) + psi''(f)|grad f|^2.
        let f = FnField::new(
            2,
            |x| 1.0 + x[0] * x[0] + 0.5 * x[1].powi(4),
            |x| vec![2.0 * x[0], 2.0 * x[1].powi(3)],
            |x| vec![2.0, 6.0 * x[1] * x[1]],
        );
        let k = MultiplicityZ2::new(vec![0.4, 1.6]).unwrap();
        let x = [0.9, -0.6];
        for psi in [StdPsi::Log, StdPsi::Exp, StdPsi::Cube] {
            let lhs = dunkl_laplacian(&Composed::new(&f, psi), &x, &k).unwrap();
            let v = f.value(&x).unwrap();
            let g = f.gradient(&x).unwrap();
            let h = f.hessian_diag(&x).unwrap();
            let drift: f64 = (0..2).map(|i| 2.0 * k.get(i) * g[i] / x[i]).sum();
            let rhs = psi.d1(v) * (h[0] + h[1] + drift) + psi.d2(v) * dot(&g, &g);
            assert!((lhs - rhs).abs() < 1e-10 * lhs.abs().max(1.0));
            assert!(pi_psi(&f, &psi, &x, &k).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn finite_difference_adapter_tracks_analytic_field() {
        let f = mixed_2d();
        let fd = FiniteDifferenceField::new(2, |x: &[f64]| f.value(x).unwrap(), 1e-4);
        let x = [0.4, -0.3];
        let (g, gd) = (f.gradient(&x).unwrap(), fd.gradient(&x).unwrap());
        let (h, hd) = (f.hessian_diag(&x).unwrap(), fd.hessian_diag(&x).unwrap());
        for i in 0..2 {
            assert!((g[i] - gd[i]).abs() < 1e-7);
            assert!((h[i] - hd[i]).abs() < 1e-5);
        }
    }

    #[test]
    fn composed_rejects_values_outside_psi_domain() {
        let k = MultiplicityZ2::new(vec![1.0]).unwrap();
        let c = Composed::new(identity_1d(), StdPsi::Log);
        assert!(matches!(dunkl_laplacian(&c, &[-1.0], &k), Err(Error::Field(_))));
    }
}
