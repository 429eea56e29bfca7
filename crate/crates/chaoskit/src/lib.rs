//! Sparse algebra on truncated Wiener-chaos expansions.
//!
//! The crate models random elements as sparse chaos expansions
//! `v = sum_a v_a xi_a` over multi-indices `a`, where `xi_a` are the
//! normalized products of probabilists' Hermite polynomials in countably
//! many independent standard Gaussians, and the coefficients `v_a` live
//! in finite-dimensional real spaces. On top of that it provides
//!
//! - exact multi-index combinatorics and graded-lexicographic
//!   enumeration of truncation boxes ([`multiindex`]),
//! - basis evaluation and a reproducible Gaussian sampler ([`hermite`]),
//! - weighted norms (power-sequence and Kondratiev families), duality
//!   pairings, and JSON serialization ([`chaos`]),
//! - the derivative, Skorokhod-integral, and Ornstein-Uhlenbeck
//!   operators with generalized drivers, the Wick product, and the
//!   white-noise / one-dimensional specializations that serve as their
//!   oracles ([`operators`]),
//! - executable verifiers for the series identities, sufficient
//!   conditions, norm bounds, and duality relations the operator
//!   calculus satisfies, plus Monte Carlo cross-checks ([`verify`]),
//! - the worked examples exposed by the CLI ([`examples`]).
//!
//! All summations run in a fixed canonical index order with compensated
//! accumulation, so every number the crate produces is reproducible
//! bit-for-bit across runs and thread counts.

pub mod chaos;
pub mod examples;
pub mod hermite;
pub mod multiindex;
pub mod operators;
pub mod sum;
pub mod verify;

pub use chaos::{duality_pairing, ChaosError, ChaosExpansion, CoefShape, TruncationBox, WeightSystem};
pub use hermite::{hermite_h, hep_alpha, xi_alpha, GaussianSample};
pub use multiindex::{enumerate_box, MultiIndex};
pub use operators::{
    malliavin_d, ornstein_uhlenbeck, required_box, skorokhod, white_noise_d, white_noise_delta,
    white_noise_ou, wick, OperatorKind, OperatorRequest,
};
