//! Per-point verification records shared by every claim suite.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What a suite checked at a grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimId {
    /// `-Delta_kappa log p_t(., y)(x) <= (d + 2 lambda) / 2t`.
    LiyauKernel,
    /// `-Delta_kappa log u(t, .)(x) <= (d + 2 lambda) / 2t` for `u = P_t f`.
    LiyauSolution,
    /// `|grad u|^2 / u^2 - d_t u / u <= beta`.
    GradientForm,
    /// Parabolic Harnack comparison.
    Harnack,
    /// Diagonal Hessian of `x -> log (p_t(x,y) / p_t(x,0))` is nonnegative.
    LogConvexity,
    /// Midpoint convexity of the same function.
    LogConvexityMidpoint,
    /// `f(a) >= 0`.
    FNonnegative,
    /// `f(0) = 0`.
    FAtZero,
    /// Scaled `h` is nondecreasing between consecutive grid points.
    HMonotone,
    /// Scaled `h(-a) = -h(a)`.
    HAntisymmetric,
    /// `r2 - r1^2 >= 0`.
    VarianceNonnegative,
    /// `Pi_log(f) <= 0`.
    PiLogNonpositive,
    /// Dunkl chain rule residual.
    ChainRule,
    /// `int p_t(x, y) mu_kappa(dy) = 1`.
    Normalization,
    /// `int p_s(x, z) p_t(z, y) mu_kappa(dz) = p_{s+t}(x, y)`.
    ChapmanKolmogorov,
    /// `d_t p = Delta_kappa p`.
    HeatEquation,
    /// `p_t(x, y) = p_t(y, x)`.
    Symmetry,
    /// Gaussian-type upper bound with the orbit distance.
    UpperBound,
}

impl ClaimId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ClaimId::LiyauKernel => "liyau_kernel",
            ClaimId::LiyauSolution => "liyau_solution",
            ClaimId::GradientForm => "gradient_form",
            ClaimId::Harnack => "harnack",
            ClaimId::LogConvexity => "log_convexity",
            ClaimId::LogConvexityMidpoint => "log_convexity_midpoint",
            ClaimId::FNonnegative => "f_nonnegative",
            ClaimId::FAtZero => "f_at_zero",
            ClaimId::HMonotone => "h_monotone",
            ClaimId::HAntisymmetric => "h_antisymmetric",
            ClaimId::VarianceNonnegative => "variance_nonnegative",
            ClaimId::PiLogNonpositive => "pi_log_nonpositive",
            ClaimId::ChainRule => "chain_rule",
            ClaimId::Normalization => "normalization",
            ClaimId::ChapmanKolmogorov => "chapman_kolmogorov",
            ClaimId::HeatEquation => "heat_equation",
            ClaimId::Symmetry => "symmetry",
            ClaimId::UpperBound => "upper_bound",
        }
    }
}

impl fmt::Display for ClaimId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How `deficit` is derived from `lhs` and `rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `lhs <= rhs`; `deficit = rhs - lhs`.
    Le,
    /// `lhs == rhs`; `deficit = -|lhs - rhs|`.
    EqAbs,
    /// `lhs == rhs` relatively; `deficit = -|lhs - rhs| / |rhs|`.
    EqRel,
}

/// Coordinates of a grid point. Unused entries stay `None` / empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub t: Option<f64>,
    pub s: Option<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub a: Option<f64>,
    pub kappa: Vec<f64>,
}

impl GridPoint {
    pub fn txy(t: f64, x: &[f64], y: &[f64], kappa: &[f64]) -> Self {
        GridPoint {
            t: Some(t),
            x: x.to_vec(),
            y: y.to_vec(),
            kappa: kappa.to_vec(),
            ..Default::default()
        }
    }

    pub fn tilt(a: f64, kappa: f64) -> Self {
        GridPoint {
            a: Some(a),
            kappa: vec![kappa],
            ..Default::default()
        }
    }

    fn all_finite(&self) -> bool {
        self.t.iter().chain(&self.s).chain(&self.a).all(|v| v.is_finite())
            && self.x.iter().chain(&self.y).chain(&self.kappa).all(|v| v.is_finite())
    }
}

/// One checked claim at one grid point. `pass` iff `deficit >= -tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim_id: ClaimId,
    pub point: GridPoint,
    pub lhs: f64,
    pub rhs: f64,
    pub deficit: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(
        claim_id: ClaimId,
        point: GridPoint,
        lhs: f64,
        rhs: f64,
        relation: Relation,
        tolerance: f64,
    ) -> Result<Self> {
        let deficit = match relation {
            Relation::Le => rhs - lhs,
            Relation::EqAbs => -(lhs - rhs).abs(),
            Relation::EqRel => -(lhs - rhs).abs() / rhs.abs(),
        };
        let report = VerificationReport {
            claim_id,
            point,
            lhs,
            rhs,
            deficit,
            tolerance,
            relation,
            pass: deficit >= -tolerance,
        };
        if ![lhs, rhs, deficit, tolerance].iter().all(|v| v.is_finite())
            || !report.point.all_finite()
        {
            return Err(Error::Field(format!(
                "non-finite entry in {claim_id} report: lhs={lhs}, rhs={rhs}, deficit={deficit}"
            )));
        }
        Ok(report)
    }

    /// `lhs <= rhs` within `tolerance`.
    pub fn inequality(
        claim_id: ClaimId,
        point: GridPoint,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
    ) -> Result<Self> {
        Self::new(claim_id, point, lhs, rhs, Relation::Le, tolerance)
    }
}

/// Pass/fail counts and the worst deficit for one claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimSummary {
    pub claim_id: ClaimId,
    pub total: usize,
    pub failed: usize,
    pub worst_deficit: f64,
}

/// Fold reports into per-claim summaries, ordered by claim.
pub fn summarize<'a>(reports: impl IntoIterator<Item = &'a VerificationReport>) -> Vec<ClaimSummary> {
    let mut map = std::collections::BTreeMap::<ClaimId, ClaimSummary>::new();
    for r in reports {
        let e = map.entry(r.claim_id).or_insert(ClaimSummary {
            claim_id: r.claim_id,
            total: 0,
            failed: 0,
            worst_deficit: f64::INFINITY,
        });
        e.total += 1;
        e.failed += usize::from(!r.pass);
        e.worst_deficit = e.worst_deficit.min(r.deficit);
    }
    map.into_values().collect()
}
