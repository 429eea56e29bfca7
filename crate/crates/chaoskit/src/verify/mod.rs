//! Executable verifiers for the quantitative statements the operator
//! calculus satisfies: multi-index series identities, sufficient
//! conditions for the derivative, the weighted-norm bounds with their
//! explicit constants, duality relations, Monte Carlo cross-checks, and
//! the sequence-space/Kondratiev inclusion.
//!
//! Every verifier returns a report carrying the computed left-hand side,
//! the theorem constant (a certified upper bound when the constant is an
//! infinite product or sum), the right-hand side, and the margin. For
//! inputs satisfying a theorem's hypotheses a failing report is a bug,
//! not noise: truncation only shrinks the nonnegative-term left-hand
//! norms.

pub mod bounds;
pub mod duality;
pub mod instances;
pub mod mc;
pub mod pk;
pub mod series;
pub mod suites;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chaos::ChaosError;

/// Relative pass tolerance for bound reports: norms span many orders of
/// magnitude across random instances, so the tolerance scales with the
/// right-hand side.
pub const BOUND_REL_TOL: f64 = 1e-9;

/// Relative tolerance for duality (rearrangement) identities.
pub const DUALITY_REL_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("weight violation: {0}")]
    WeightViolation(String),
    #[error("invalid exponent p = {0}: the constants require p > 1/2")]
    InvalidP(f64),
    #[error("weight-sequence relation violated: {0}")]
    RelationViolated(String),
    #[error(transparent)]
    Chaos(#[from] ChaosError),
}

/// Outcome of one norm-bound check: `lhs <= constant * (input norms)`
/// up to the relative tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem_id: String,
    pub lhs: f64,
    /// Theorem constant; when it truncates an infinite product or sum,
    /// this is a certified upper bound and `constant_tail_bound` is the
    /// slack added on top of the finite part.
    pub constant: f64,
    pub constant_tail_bound: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub metadata: serde_json::Value,
}

impl BoundReport {
    pub fn evaluate(
        theorem_id: impl Into<String>,
        lhs: f64,
        constant: f64,
        constant_tail_bound: f64,
        norm_product: f64,
        metadata: serde_json::Value,
    ) -> Self {
        let rhs = constant * norm_product;
        let margin = rhs - lhs;
        let pass = lhs <= rhs + BOUND_REL_TOL * rhs.abs();
        Self {
            theorem_id: theorem_id.into(),
            lhs,
            constant,
            constant_tail_bound,
            rhs,
            margin,
            pass,
            metadata,
        }
    }
}

/// Outcome of a series-identity check: partial sums over growing boxes
/// against the closed form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesReport {
    pub identity_id: String,
    /// `(degree bound N, partial sum)` per box, in the given order.
    pub partial_sums: Vec<(u32, f64)>,
    pub closed_form: f64,
    pub rel_gap: f64,
    pub converged: bool,
    pub metadata: serde_json::Value,
}

/// Two pairings that must agree after rearrangement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualityReport {
    pub identity_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub rel_gap: f64,
    pub pass: bool,
    pub metadata: serde_json::Value,
}

impl DualityReport {
    pub fn evaluate(
        identity_id: impl Into<String>,
        lhs: f64,
        rhs: f64,
        metadata: serde_json::Value,
    ) -> Self {
        let diff = (lhs - rhs).abs();
        let denom = lhs.abs().max(rhs.abs());
        let rel_gap = if diff == 0.0 { 0.0 } else { diff / denom };
        Self {
            identity_id: identity_id.into(),
            lhs,
            rhs,
            rel_gap,
            pass: rel_gap <= DUALITY_REL_TOL,
            metadata,
        }
    }
}

/// A Monte Carlo estimate compared against a target at a
/// standard-error-scaled tolerance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McReport {
    pub id: String,
    pub n_samples: u64,
    pub seed: u64,
    pub generator: String,
    pub lhs_mean: f64,
    pub rhs_mean: f64,
    pub diff: f64,
    pub diff_se: f64,
    /// Pass when |diff| <= 5 * diff_se (or the difference is exactly 0).
    pub pass: bool,
    pub metadata: serde_json::Value,
}
