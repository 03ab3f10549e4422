//! Numerical verification of Li–Yau type inequalities for the Dunkl heat
//! kernel of the reflection group `Z_2^d`.
//!
//! The crate provides Gauss–Jacobi quadrature built by the Golub–Welsch
//! method, the Dunkl operators and their chain rule, the product heat kernel
//! with analytic log-derivatives, the heat semigroup on product data, and
//! checks that turn each inequality into a [`VerificationReport`].

// `!(x > 0.0)` is deliberate throughout: it rejects NaN along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dunkl;
pub mod error;
pub mod heat_kernel;
pub mod inequalities;
pub mod quadrature;
pub mod report;
pub mod scan;
pub mod semigroup;
pub mod solution;

pub use dunkl::{
    bregman, chain_rule_residual, dunkl_derivative, dunkl_laplacian, dunkl_laplacian_terms,
    is_on_hyperplane, pi_psi, reflect, ChainRuleResidual, Composed, FiniteDifferenceField,
    FnField, MultiplicityZ2, Psi, RootSystemZ2, ScalarField, StdPsi, DEFAULT_EPS_REFL,
};
pub use error::{Error, Result};
pub use heat_kernel::{
    e_kappa, kernel, log_e_kappa, log_kernel, log_kernel_derivatives, moment_ratios, KernelField,
    KernelPoint, LogKernelField, MomentRatios,
};
pub use inequalities::{
    coordinate_term, f_of_a, gradient_form_check, h_of_a, harnack_check, liyau_functional,
    log_convexity_check, log_convexity_midpoint_check, CoordinateTerm, LiYauDecomposition,
};
pub use quadrature::{gauss_jacobi_rule, halfline_rule, Adaptive, HalflineRule, JacobiRule};
pub use report::{summarize, ClaimId, ClaimSummary, GridPoint, Relation, VerificationReport};
pub use semigroup::{
    apply_semigroup, chapman_kolmogorov_check, heat_residual, liyau_for_solution,
    normalization_check, Convention, InitialDatum, Profile, SemigroupSolution, WeightedMeasure,
};
pub use solution::{FnSolution, KernelSolution, LogSnapshot, PositiveSolution};
