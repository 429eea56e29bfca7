//! Multi-index arithmetic and enumeration.
//!
//! A multi-index is a finitely supported sequence `a = (a_1, a_2, ...)` of
//! nonnegative integers. This module provides exact arithmetic on them
//! (sums, dominated differences, factorials `a! = prod_k a_k!`, and the
//! componentwise binomial coefficients `C(a, b) = prod_k C(a_k, b_k)`),
//! the graded-lexicographic enumeration of truncation boxes, and the
//! power weights `q^{l*a} = prod_k q_k^{l*a_k}`.
//!
//! Factorials and binomials are carried in arbitrary-precision integers;
//! square roots are taken only at the final conversion to floating point,
//! since `sqrt(C(a+b, b))` computed through f64 binomials loses all
//! precision once total degrees reach a few dozen.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

/// Errors from multi-index construction and weight evaluation.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MultiIndexError {
    #[error("positions must be >= 1 and strictly increasing, values >= 1")]
    InvalidEntries,
    #[error("index has support at position {position}, beyond the declared dimension {max_dim}")]
    UnsupportedIndex { position: u32, max_dim: u32 },
}

/// A finitely supported sequence of nonnegative integers.
///
/// Stored sparsely as `(position, value)` pairs with 1-based positions,
/// strictly increasing, and zero entries never stored. The zero index
/// `(0)` is the empty list and is a first-class value, never an error.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    entries: Vec<(u32, u32)>,
}

impl MultiIndex {
    /// The zero multi-index `(0)`.
    pub fn zero() -> Self {
        Self::default()
    }

    /// The unit index `eps(k)` with a single 1 at position `k >= 1`.
    ///
    /// `epsilon(0)` is the zero index, matching the usual convention.
    pub fn epsilon(k: u32) -> Self {
        Self::single(k, 1)
    }

    /// The index `v * eps(k)`; zero when either argument is zero.
    pub fn single(k: u32, v: u32) -> Self {
        if k == 0 || v == 0 {
            Self::zero()
        } else {
            Self {
                entries: vec![(k, v)],
            }
        }
    }

    /// Builds from sparse `(position, value)` pairs.
    ///
    /// Positions must be >= 1 and strictly increasing; values must be >= 1.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Result<Self, MultiIndexError> {
        let mut last = 0u32;
        for &(pos, val) in pairs {
            if pos == 0 || val == 0 || pos <= last {
                return Err(MultiIndexError::InvalidEntries);
            }
            last = pos;
        }
        Ok(Self {
            entries: pairs.to_vec(),
        })
    }

    /// Builds from a dense prefix `(a_1, a_2, ..)`; zeros are dropped.
    pub fn from_dense(values: &[u32]) -> Self {
        Self {
            entries: values
                .iter()
                .enumerate()
                .filter(|&(_, &v)| v > 0)
                .map(|(i, &v)| (i as u32 + 1, v))
                .collect(),
        }
    }

    /// Dense prefix of length `len` (entries beyond `len` must be absent).
    pub fn to_dense(&self, len: usize) -> Vec<u32> {
        let mut out = vec![0u32; len];
        for &(pos, val) in &self.entries {
            out[pos as usize - 1] = val;
        }
        out
    }

    /// The stored sparse entries, positions ascending.
    pub fn entries(&self) -> &[(u32, u32)] {
        &self.entries
    }

    /// Value at position `k >= 1` (0 when absent).
    pub fn get(&self, k: u32) -> u32 {
        self.entries
            .binary_search_by_key(&k, |&(pos, _)| pos)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Total degree `|a| = sum_k a_k`.
    pub fn degree(&self) -> u64 {
        self.entries.iter().map(|&(_, v)| u64::from(v)).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest position with a nonzero entry (0 for the zero index).
    pub fn max_position(&self) -> u32 {
        self.entries.last().map_or(0, |&(pos, _)| pos)
    }

    /// Componentwise sum `a + b`.
    pub fn add(&self, other: &Self) -> Self {
        let mut entries = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        while i < self.entries.len() && j < other.entries.len() {
            let (pa, va) = self.entries[i];
            let (pb, vb) = other.entries[j];
            match pa.cmp(&pb) {
                std::cmp::Ordering::Less => {
                    entries.push((pa, va));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    entries.push((pb, vb));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    entries.push((pa, va + vb));
                    i += 1;
                    j += 1;
                }
            }
        }
        entries.extend_from_slice(&self.entries[i..]);
        entries.extend_from_slice(&other.entries[j..]);
        Self { entries }
    }

    /// `a - b` when `b <= a` componentwise, `None` otherwise.
    ///
    /// Non-domination is an ordinary outcome, not a failure.
    pub fn sub_checked(&self, other: &Self) -> Option<Self> {
        let mut entries = Vec::with_capacity(self.entries.len());
        let mut i = 0;
        for &(pb, vb) in &other.entries {
            // Copy positions of self strictly before pb.
            while i < self.entries.len() && self.entries[i].0 < pb {
                entries.push(self.entries[i]);
                i += 1;
            }
            if i >= self.entries.len() || self.entries[i].0 != pb {
                return None; // b has support where a does not
            }
            let (pa, va) = self.entries[i];
            if va < vb {
                return None;
            }
            if va > vb {
                entries.push((pa, va - vb));
            }
            i += 1;
        }
        entries.extend_from_slice(&self.entries[i..]);
        Some(Self { entries })
    }

    /// Componentwise domination `b <= a`, i.e. `self >= other`.
    pub fn dominates(&self, other: &Self) -> bool {
        other
            .entries
            .iter()
            .all(|&(pos, val)| self.get(pos) >= val)
    }

    /// Exact factorial `a! = prod_k a_k!`; `(0)! = 1` (empty product).
    pub fn factorial(&self) -> BigUint {
        let mut acc = BigUint::one();
        for &(_, val) in &self.entries {
            for m in 2..=u64::from(val) {
                acc *= m;
            }
        }
        acc
    }
}

/// Serializes as the sparse pair list `[[position, value], ...]`, the
/// same form the expansion files use; `(0)` is the empty list.
impl serde::Serialize for MultiIndex {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

impl<'de> serde::Deserialize<'de> for MultiIndex {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pairs = Vec::<(u32, u32)>::deserialize(deserializer)?;
        MultiIndex::from_pairs(&pairs).map_err(serde::de::Error::custom)
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "(0)");
        }
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|&(pos, val)| {
                if val == 1 {
                    format!("e{pos}")
                } else {
                    format!("{val}e{pos}")
                }
            })
            .collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// Canonical order: graded lexicographic.
///
/// Sort by total degree ascending, then lexicographically on the dense
/// prefix with position 1 compared first and the larger entry ranked
/// earlier, so that degree 2 in two dimensions reads
/// `2e1, e1+e2, 2e2`. Every summation in the crate follows this order.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.entries.get(i), other.entries.get(j)) {
                (Some(&(pa, va)), Some(&(pb, vb))) => match pa.cmp(&pb) {
                    // A nonzero entry at an earlier position beats the
                    // implicit zero of the other index there.
                    Ordering::Less => return Ordering::Less,
                    Ordering::Greater => return Ordering::Greater,
                    Ordering::Equal => {
                        match va.cmp(&vb) {
                            Ordering::Greater => return Ordering::Less,
                            Ordering::Less => return Ordering::Greater,
                            Ordering::Equal => {}
                        }
                        i += 1;
                        j += 1;
                    }
                },
                (Some(_), None) => return Ordering::Less,
                (None, Some(_)) => return Ordering::Greater,
                (None, None) => return Ordering::Equal,
            }
        }
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact binomial `C(a, b) = prod_k C(a_k, b_k)`, with the convention
/// that the result is 0 unless `b <= a`.
pub fn binomial(top: &MultiIndex, bottom: &MultiIndex) -> BigUint {
    if !top.dominates(bottom) {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for &(pos, vb) in bottom.entries() {
        let va = top.get(pos);
        acc *= binomial_scalar(u64::from(va), u64::from(vb));
    }
    acc
}

/// Exact scalar binomial coefficient `C(n, k)` (0 when `k > n`).
pub fn binomial_scalar(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Natural log of `n!` by direct summation; exact enough for the
/// large-degree fallback below.
pub fn ln_factorial(n: u32) -> f64 {
    let mut acc = 0.0f64;
    for m in 2..=u64::from(n) {
        acc += (m as f64).ln();
    }
    acc
}

fn ln_binomial(top: &MultiIndex, bottom: &MultiIndex) -> f64 {
    let mut acc = 0.0f64;
    for &(pos, vb) in bottom.entries() {
        let va = top.get(pos);
        acc += ln_factorial(va) - (ln_factorial(vb) + ln_factorial(va - vb));
    }
    acc
}

/// `sqrt(C(top, bottom))` as f64: exact integer then square root while
/// the binomial fits 64 bits, log-space otherwise.
///
/// The crossover sits at `C > 2^64 - 1`; both paths agree to 1e-12
/// relative at the boundary (see tests).
pub fn sqrt_binomial(top: &MultiIndex, bottom: &MultiIndex) -> f64 {
    if !top.dominates(bottom) {
        return 0.0;
    }
    let c = binomial(top, bottom);
    match c.to_u64() {
        Some(v) => (v as f64).sqrt(),
        None => (0.5 * ln_binomial(top, bottom)).exp(),
    }
}

/// `sqrt(C(top1, bottom1) * C(top2, bottom2))` with a single rounding of
/// the integer product, as needed by the second-order operator kernels.
pub fn sqrt_binomial_product(
    top1: &MultiIndex,
    bottom1: &MultiIndex,
    top2: &MultiIndex,
    bottom2: &MultiIndex,
) -> f64 {
    if !top1.dominates(bottom1) || !top2.dominates(bottom2) {
        return 0.0;
    }
    let c = binomial(top1, bottom1) * binomial(top2, bottom2);
    match c.to_u64() {
        Some(v) => (v as f64).sqrt(),
        None => (0.5 * (ln_binomial(top1, bottom1) + ln_binomial(top2, bottom2))).exp(),
    }
}

/// All multi-indices with support in `{1..k}` and total degree `<= n`,
/// in canonical order. The count is `C(n + k, k)`.
pub fn enumerate_box(k: u32, n: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    visit_box(k, n, |a| out.push(a.clone()));
    out
}

/// Streaming variant of [`enumerate_box`]: canonical order, one index at
/// a time, without materializing the box. Large degree bounds make the
/// box size `C(n + k, k)` explode, and series partial sums only need a
/// single pass.
pub fn visit_box<F: FnMut(&MultiIndex)>(k: u32, n: u32, mut visit: F) {
    let mut prefix: Vec<u32> = Vec::new();
    for degree in 0..=n {
        emit_compositions(degree, k, &mut prefix, &mut visit);
    }
}

fn emit_compositions<F: FnMut(&MultiIndex)>(
    degree: u32,
    dims: u32,
    prefix: &mut Vec<u32>,
    visit: &mut F,
) {
    if dims == 0 {
        if degree == 0 {
            visit(&MultiIndex::from_dense(prefix));
        }
        return;
    }
    if dims == 1 {
        prefix.push(degree);
        visit(&MultiIndex::from_dense(prefix));
        prefix.pop();
        return;
    }
    for first in (0..=degree).rev() {
        prefix.push(first);
        emit_compositions(degree - first, dims - 1, prefix, visit);
        prefix.pop();
    }
}

/// Power weight `prod_k q_k^{l * a_k}` for a finite positive sequence `q`.
///
/// Errors when the index has support beyond `q.len()`.
pub fn power_weight(q: &[f64], ell: f64, a: &MultiIndex) -> Result<f64, MultiIndexError> {
    let mut acc = 1.0f64;
    for &(pos, val) in a.entries() {
        let Some(&qk) = q.get(pos as usize - 1) else {
            return Err(MultiIndexError::UnsupportedIndex {
                position: pos,
                max_dim: q.len() as u32,
            });
        };
        acc *= qk.powf(ell * f64::from(val));
    }
    Ok(acc)
}

/// The built-in variant of [`power_weight`] with `q_k = 2k`, defined for
/// every position: `(2N)^{l*a} = prod_k (2k)^{l*a_k}`.
pub fn two_n_weight(ell: f64, a: &MultiIndex) -> f64 {
    let mut acc = 1.0f64;
    for &(pos, val) in a.entries() {
        acc *= (2.0 * f64::from(pos)).powf(ell * f64::from(val));
    }
    acc
}

/// A reduced nonnegative rational with arbitrary-precision numerator and
/// denominator: the exact carrier for factorial and binomial ratios
/// before any square root is taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigRatio(Ratio<BigUint>);

impl BigRatio {
    /// Builds `numerator / denominator`, reduced. `None` when the
    /// denominator is zero.
    pub fn new(numerator: BigUint, denominator: BigUint) -> Option<Self> {
        if denominator.is_zero() {
            None
        } else {
            Some(Self(Ratio::new(numerator, denominator)))
        }
    }

    pub fn from_integer(value: BigUint) -> Self {
        Self(Ratio::from_integer(value))
    }

    pub fn one() -> Self {
        Self(Ratio::one())
    }

    pub fn numerator(&self) -> &BigUint {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigUint {
        self.0.denom()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn recip(&self) -> Option<Self> {
        if self.0.numer().is_zero() {
            None
        } else {
            Some(Self(self.0.recip()))
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0
            .to_f64()
            .unwrap_or_else(|| big_to_f64(self.0.numer()) / big_to_f64(self.0.denom()))
    }
}

/// Nearest-f64 conversion for desk-scale big integers.
pub fn big_to_f64(value: &BigUint) -> f64 {
    value.to_f64().unwrap_or(f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(dense: &[u32]) -> MultiIndex {
        MultiIndex::from_dense(dense)
    }

    #[test]
    fn add_definition() {
        assert_eq!(
            MultiIndex::epsilon(1).add(&MultiIndex::epsilon(1)),
            MultiIndex::single(1, 2)
        );
        assert_eq!(MultiIndex::epsilon(1).add(&MultiIndex::epsilon(3)), mi(&[1, 0, 1]));
        let a = mi(&[2, 0, 1]);
        assert_eq!(MultiIndex::zero().add(&a), a);
        assert_eq!(a.add(&a).degree(), 2 * a.degree());
    }

    #[test]
    fn sub_checked_domination() {
        assert_eq!(
            MultiIndex::single(1, 2).sub_checked(&MultiIndex::epsilon(1)),
            Some(MultiIndex::epsilon(1))
        );
        assert_eq!(MultiIndex::epsilon(1).sub_checked(&MultiIndex::epsilon(2)), None);
        let a = mi(&[3, 1, 4]);
        assert_eq!(a.sub_checked(&MultiIndex::zero()), Some(a.clone()));
        // b has support where a does not
        assert_eq!(mi(&[0, 1]).sub_checked(&mi(&[1, 1])), None);
    }

    #[test]
    fn factorial_values() {
        assert_eq!(mi(&[3, 2]).factorial(), BigUint::from(12u32));
        assert_eq!(MultiIndex::zero().factorial(), BigUint::one());
        assert_eq!(MultiIndex::single(2, 5).factorial(), BigUint::from(120u32));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(&mi(&[2, 1]), &mi(&[1, 1])), BigUint::from(2u32));
        // 0 when the bottom is not dominated
        assert_eq!(
            binomial(&MultiIndex::epsilon(1), &MultiIndex::epsilon(2)),
            BigUint::zero()
        );
        let a = mi(&[4, 0, 2]);
        assert_eq!(binomial(&a, &MultiIndex::zero()), BigUint::one());
    }

    #[test]
    fn vandermonde_free_factorial_identity() {
        // C(a+b, b) * a! * b! = (a+b)! exactly, for every pair in a box.
        for a in enumerate_box(3, 4) {
            for b in enumerate_box(3, 4) {
                let sum = a.add(&b);
                assert_eq!(
                    binomial(&sum, &b) * a.factorial() * b.factorial(),
                    sum.factorial(),
                    "identity failed for {a} and {b}"
                );
            }
        }
    }

    #[test]
    fn binomial_bounded_by_two_pow_degree() {
        for a in enumerate_box(3, 5) {
            let bound = BigUint::from(2u32).pow(a.degree() as u32);
            for b in enumerate_box(3, 5) {
                assert!(binomial(&a, &b) <= bound);
            }
        }
    }

    #[test]
    fn add_sub_roundtrip() {
        for a in enumerate_box(2, 3) {
            for b in enumerate_box(3, 2) {
                assert_eq!(a.add(&b).sub_checked(&b), Some(a.clone()));
            }
        }
    }

    #[test]
    fn box_enumeration_order_and_count() {
        let small = enumerate_box(2, 2);
        let expected = vec![
            MultiIndex::zero(),
            MultiIndex::epsilon(1),
            MultiIndex::epsilon(2),
            MultiIndex::single(1, 2),
            MultiIndex::epsilon(1).add(&MultiIndex::epsilon(2)),
            MultiIndex::single(2, 2),
        ];
        assert_eq!(small, expected);

        assert_eq!(enumerate_box(0, 5), vec![MultiIndex::zero()]);
        assert_eq!(enumerate_box(3, 4).len(), 35);

        // Strictly increasing in canonical order, hence no duplicates.
        let all = enumerate_box(4, 5);
        assert_eq!(all.len(), 126); // C(9, 4)
        for pair in all.windows(2) {
            assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn power_weight_values() {
        let a = mi(&[1, 1]);
        assert_eq!(two_n_weight(2.0, &a), 64.0);
        assert_eq!(power_weight(&[3.0, 5.0], 1.0, &MultiIndex::zero()).unwrap(), 1.0);
        let w = power_weight(&[3.0], -1.0, &MultiIndex::single(1, 2)).unwrap();
        assert!((w - 1.0 / 9.0).abs() < 1e-15);
        assert!(matches!(
            power_weight(&[3.0], 1.0, &MultiIndex::epsilon(2)),
            Err(MultiIndexError::UnsupportedIndex { position: 2, max_dim: 1 })
        ));
    }

    #[test]
    fn power_weight_exponent_additivity() {
        let q = [1.5, 2.0, 7.0];
        for a in enumerate_box(3, 4) {
            let combined = power_weight(&q, 0.7 + 1.9, &a).unwrap();
            let split =
                power_weight(&q, 0.7, &a).unwrap() * power_weight(&q, 1.9, &a).unwrap();
            assert!((combined - split).abs() <= 1e-12 * combined.abs().max(1.0));
        }
    }

    #[test]
    fn sqrt_binomial_crossover() {
        // C(66, 33) still fits u64; C(68, 34) does not.
        let below_top = MultiIndex::single(1, 66);
        let below_bot = MultiIndex::single(1, 33);
        assert!(binomial(&below_top, &below_bot).to_u64().is_some());
        let above_top = MultiIndex::single(1, 68);
        let above_bot = MultiIndex::single(1, 34);
        assert!(binomial(&above_top, &above_bot).to_u64().is_none());

        for (top, bot) in [(below_top, below_bot), (above_top, above_bot)] {
            let direct = sqrt_binomial(&top, &bot);
            let logspace = (0.5 * ln_binomial(&top, &bot)).exp();
            let exact = big_to_f64(&binomial(&top, &bot)).sqrt();
            assert!((direct - exact).abs() <= 1e-12 * exact);
            assert!((logspace - exact).abs() <= 1e-12 * exact);
        }
    }

    #[test]
    fn sqrt_binomial_not_dominated_is_zero() {
        assert_eq!(sqrt_binomial(&MultiIndex::epsilon(1), &MultiIndex::epsilon(2)), 0.0);
    }

    #[test]
    fn sqrt_binomial_product_matches_pairwise() {
        let a = mi(&[3, 2]);
        let b = mi(&[1, 1]);
        let c = mi(&[2, 4]);
        let d = mi(&[0, 2]);
        let fused = sqrt_binomial_product(&a, &b, &c, &d);
        let split = sqrt_binomial(&a, &b) * sqrt_binomial(&c, &d);
        assert!((fused - split).abs() <= 1e-14 * fused.max(1.0));
    }

    #[test]
    fn display_forms() {
        assert_eq!(MultiIndex::zero().to_string(), "(0)");
        assert_eq!(mi(&[2, 0, 1]).to_string(), "2e1+e3");
    }

    #[test]
    fn big_ratio_reduction_and_invariants() {
        let r = BigRatio::new(BigUint::from(12u32), BigUint::from(8u32)).unwrap();
        assert_eq!(r.numerator(), &BigUint::from(3u32));
        assert_eq!(r.denominator(), &BigUint::from(2u32));
        assert_eq!(r.to_f64(), 1.5);
        assert!(BigRatio::new(BigUint::one(), BigUint::zero()).is_none());
        let product = r.mul(&r.recip().unwrap());
        assert_eq!(product, BigRatio::one());
    }

    #[test]
    fn canonical_order_is_graded() {
        for window in enumerate_box(3, 3).windows(2) {
            assert!(window[0].degree() <= window[1].degree());
        }
        // Position 1 compared first, larger entry earlier.
        assert!(MultiIndex::epsilon(1) < MultiIndex::epsilon(2));
        assert!(MultiIndex::single(1, 2) < mi(&[1, 1]));
        assert!(mi(&[1, 1]) < MultiIndex::single(2, 2));
    }
}
