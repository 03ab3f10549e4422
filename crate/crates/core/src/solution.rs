//! Positive solutions `u(t, x)` of the Dunkl heat equation, exposed through
//! their logarithm so that far-tail values stay representable.

use crate::dunkl::{MultiplicityZ2, ScalarField};
use crate::error::{Error, Result};
use crate::heat_kernel::log_kernel_derivatives;
use crate::quadrature::Adaptive;

/// A positive space-time field described by `ln u` and its derivatives.
pub trait PositiveSolution {
    fn dim(&self) -> usize;
    fn log_value(&self, t: f64, x: &[f64]) -> Result<f64>;
    fn grad_log(&self, t: f64, x: &[f64]) -> Result<Vec<f64>>;
    fn hess_diag_log(&self, t: f64, x: &[f64]) -> Result<Vec<f64>>;
    fn dt_log(&self, t: f64, x: &[f64]) -> Result<f64>;
}

impl<S: PositiveSolution + ?Sized> PositiveSolution for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn log_value(&self, t: f64, x: &[f64]) -> Result<f64> {
        (**self).log_value(t, x)
    }
    fn grad_log(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        (**self).grad_log(t, x)
    }
    fn hess_diag_log(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        (**self).hess_diag_log(t, x)
    }
    fn dt_log(&self, t: f64, x: &[f64]) -> Result<f64> {
        (**self).dt_log(t, x)
    }
}

/// `x -> ln u(t, x)` at a frozen time.
pub struct LogSnapshot<'a, S: ?Sized> {
    solution: &'a S,
    t: f64,
}

impl<'a, S: PositiveSolution + ?Sized> LogSnapshot<'a, S> {
    pub fn new(solution: &'a S, t: f64) -> Self {
        LogSnapshot { solution, t }
    }
}

impl<S: PositiveSolution + ?Sized> ScalarField for LogSnapshot<'_, S> {
    fn dim(&self) -> usize {
        self.solution.dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        self.solution.log_value(self.t, x)
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.solution.grad_log(self.t, x)
    }
    fn hessian_diag(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.solution.hess_diag_log(self.t, x)
    }
}

/// The fundamental solution `u(t, x) = p_t(x, y0)`.
#[derive(Debug, Clone)]
pub struct KernelSolution {
    pub source: Vec<f64>,
    pub kappa: MultiplicityZ2,
    pub adaptive: Adaptive,
}

impl KernelSolution {
    pub fn new(source: &[f64], kappa: &MultiplicityZ2, adaptive: Adaptive) -> Result<Self> {
        kappa.check_point(source)?;
        Ok(KernelSolution {
            source: source.to_vec(),
            kappa: kappa.clone(),
            adaptive,
        })
    }
}

impl PositiveSolution for KernelSolution {
    fn dim(&self) -> usize {
        self.kappa.dim()
    }
    fn log_value(&self, t: f64, x: &[f64]) -> Result<f64> {
        crate::heat_kernel::log_kernel(t, x, &self.source, &self.kappa, &self.adaptive)
    }
    fn grad_log(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        Ok(log_kernel_derivatives(t, x, &self.source, &self.kappa, &self.adaptive)?.grad_x_log_p)
    }
    fn hess_diag_log(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        Ok(log_kernel_derivatives(t, x, &self.source, &self.kappa, &self.adaptive)?
            .hess_diag_x_log_p)
    }
    fn dt_log(&self, t: f64, x: &[f64]) -> Result<f64> {
        Ok(log_kernel_derivatives(t, x, &self.source, &self.kappa, &self.adaptive)?.dt_log_p)
    }
}

type SpaceTimeFn<T> = Box<dyn Fn(f64, &[f64]) -> T + Send + Sync>;

/// A solution given in plain (non-log) form by closures for
/// `u`, `grad u`, the Hessian diagonal of `u`, and `d_t u`.
pub struct FnSolution {
    dim: usize,
    value: SpaceTimeFn<f64>,
    gradient: SpaceTimeFn<Vec<f64>>,
    hessian_diag: SpaceTimeFn<Vec<f64>>,
    time_derivative: SpaceTimeFn<f64>,
}

impl FnSolution {
    pub fn new(
        dim: usize,
        value: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        hessian_diag: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        time_derivative: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FnSolution {
            dim,
            value: Box::new(value),
            gradient: Box::new(gradient),
            hessian_diag: Box::new(hessian_diag),
            time_derivative: Box::new(time_derivative),
        }
    }

    fn positive(&self, t: f64, x: &[f64]) -> Result<f64> {
        let u = (self.value)(t, x);
        if u > 0.0 && u.is_finite() {
            Ok(u)
        } else {
            Err(Error::domain(format!("solution must be positive, got u={u} at t={t}")))
        }
    }
}

impl PositiveSolution for FnSolution {
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_value(&self, t: f64, x: &[f64]) -> Result<f64> {
        Ok(self.positive(t, x)?.ln())
    }
    fn grad_log(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let u = self.positive(t, x)?;
        Ok((self.gradient)(t, x).into_iter().map(|g| g / u).collect())
    }
    fn hess_diag_log(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        let u = self.positive(t, x)?;
        let g = (self.gradient)(t, x);
        let h = (self.hessian_diag)(t, x);
        Ok(g.iter().zip(&h).map(|(gi, hi)| hi / u - (gi / u).powi(2)).collect())
    }
    fn dt_log(&self, t: f64, x: &[f64]) -> Result<f64> {
        let u = self.positive(t, x)?;
        Ok((self.time_derivative)(t, x) / u)
    }
}
