//! Sparse chaos expansions with finite-dimensional coefficients, weighted
//! norms, duality pairings, and JSON serialization.
//!
//! An expansion holds `v = sum_a v_a xi_a` as a sparse map from
//! multi-index to coefficient array. Coefficients live in `R^dx`
//! (`Scalar` shape) or in `R^{dx x du}` stored row-major (`Tensor`
//! shape); the abstract separable Hilbert spaces of the underlying
//! theory are modeled by these finite-dimensional spaces with their
//! standard bases, under which every result here specializes cleanly.
//! All inner products are Euclidean/Frobenius.
//!
//! Norm and pairing sums accumulate in canonical index order with
//! compensated summation. Exact-zero coefficients are pruned at literal
//! `0.0`, never at an epsilon: the operator layer relies on support
//! structure, and epsilon-pruning would corrupt adjointness checks.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hermite::{xi_alpha, GaussianSample};
use crate::multiindex::{big_to_f64, two_n_weight, BigRatio, MultiIndex, MultiIndexError};
use crate::sum::{CompensatedSum, CompensatedVec};

#[derive(Debug, Error)]
pub enum ChaosError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("index {index} lies outside the truncation box (K={k}, N={n})")]
    OutsideBox { index: String, k: u32, n: u32 },
    #[error("coefficient has {got} components, shape requires {expected}")]
    BadCoefficientLength { expected: usize, got: usize },
    #[error("coefficients must be finite")]
    NonFiniteCoefficient,
    #[error("invalid shape: dimensions must be >= 1")]
    InvalidShape,
    #[error("invalid weight system: {0}")]
    InvalidWeight(String),
    #[error(transparent)]
    Index(#[from] MultiIndexError),
    #[error("malformed expansion file: {0}")]
    Malformed(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Shape of the per-index coefficient: a vector in `R^dx` or a matrix in
/// `R^{dx x du}` (row-major).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CoefShape {
    Scalar { dx: usize },
    Tensor { dx: usize, du: usize },
}

impl CoefShape {
    pub fn validate(&self) -> Result<(), ChaosError> {
        match *self {
            CoefShape::Scalar { dx } if dx >= 1 => Ok(()),
            CoefShape::Tensor { dx, du } if dx >= 1 && du >= 1 => Ok(()),
            _ => Err(ChaosError::InvalidShape),
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            CoefShape::Scalar { dx } => dx,
            CoefShape::Tensor { dx, du } => dx * du,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> usize {
        match *self {
            CoefShape::Scalar { dx } | CoefShape::Tensor { dx, .. } => dx,
        }
    }

    pub fn du(&self) -> Option<usize> {
        match *self {
            CoefShape::Scalar { .. } => None,
            CoefShape::Tensor { du, .. } => Some(du),
        }
    }
}

/// The finite index set for desk-scale computation: active dimensions
/// `<= k`, total degree `<= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationBox {
    pub k: u32,
    pub n: u32,
}

impl TruncationBox {
    pub fn new(k: u32, n: u32) -> Self {
        Self { k, n }
    }

    pub fn contains(&self, a: &MultiIndex) -> bool {
        a.max_position() <= self.k && a.degree() <= u64::from(self.n)
    }

    /// All indices in the box, canonical order; `C(n + k, k)` of them.
    pub fn enumerate(&self) -> Vec<MultiIndex> {
        crate::multiindex::enumerate_box(self.k, self.n)
    }

    /// Smallest box containing both operands' boxes.
    pub fn hull(&self, other: &Self) -> Self {
        Self {
            k: self.k.max(other.k),
            n: self.n.max(other.n),
        }
    }
}

impl std::fmt::Display for TruncationBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(K={}, N={})", self.k, self.n)
    }
}

/// Weight rule `a -> r_a > 0`.
///
/// `SequencePower` gives `r_a = q^{p*a} = prod_k q_k^{p*a_k}` (finite
/// sequence, so indices must be supported within its length);
/// `Kondratiev` gives `r_a = (a!)^{rho/2} (2N)^{ell*a}`; `Custom` is an
/// explicit table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightSystem {
    SequencePower {
        q: Vec<f64>,
        p: f64,
    },
    Kondratiev {
        rho: f64,
        ell: f64,
    },
    Custom {
        #[serde(with = "custom_map_serde")]
        map: BTreeMap<MultiIndex, f64>,
    },
}

/// JSON maps need string keys, so a custom table serializes as a list of
/// `[alpha, weight]` pairs in canonical order.
mod custom_map_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<MultiIndex, f64>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(map.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<BTreeMap<MultiIndex, f64>, D::Error> {
        let pairs = Vec::<(MultiIndex, f64)>::deserialize(deserializer)?;
        Ok(pairs.into_iter().collect())
    }
}

impl WeightSystem {
    pub fn sequence_power(q: Vec<f64>, p: f64) -> Result<Self, ChaosError> {
        if q.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(ChaosError::InvalidWeight(
                "sequence entries must be positive and finite".into(),
            ));
        }
        Ok(WeightSystem::SequencePower { q, p })
    }

    pub fn kondratiev(rho: f64, ell: f64) -> Result<Self, ChaosError> {
        if !(-1.0..=1.0).contains(&rho) {
            return Err(ChaosError::InvalidWeight(format!(
                "rho must lie in [-1, 1], got {rho}"
            )));
        }
        Ok(WeightSystem::Kondratiev { rho, ell })
    }

    /// The trivial system `r_a = 1` (Kondratiev with rho = ell = 0).
    pub fn unit() -> Self {
        WeightSystem::Kondratiev { rho: 0.0, ell: 0.0 }
    }

    pub fn custom(map: BTreeMap<MultiIndex, f64>) -> Result<Self, ChaosError> {
        if map.values().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(ChaosError::InvalidWeight(
                "custom weights must be positive and finite".into(),
            ));
        }
        Ok(WeightSystem::Custom { map })
    }

    /// Pointwise minimum of two systems over a box, as a `Custom` table:
    /// the common space into which both weighted spaces embed.
    pub fn min_combine(
        &self,
        other: &Self,
        bounds: &TruncationBox,
    ) -> Result<Self, ChaosError> {
        let mut map = BTreeMap::new();
        for a in bounds.enumerate() {
            let w = self.weight(&a)?.min(other.weight(&a)?);
            map.insert(a, w);
        }
        Self::custom(map)
    }

    /// The weight `r_a`.
    pub fn weight(&self, a: &MultiIndex) -> Result<f64, ChaosError> {
        match self {
            WeightSystem::SequencePower { q, p } => {
                Ok(crate::multiindex::power_weight(q, *p, a)?)
            }
            WeightSystem::Kondratiev { rho, ell } => {
                let fact = a.factorial();
                // Exact integer or exact ratio carried until the final
                // square root for the common rho = +/-1 cases.
                let fpart = if *rho == 1.0 {
                    BigRatio::from_integer(fact).to_f64().sqrt()
                } else if *rho == -1.0 {
                    BigRatio::new(BigUint::one(), fact)
                        .expect("factorial is nonzero")
                        .to_f64()
                        .sqrt()
                } else {
                    big_to_f64(&fact).powf(rho / 2.0)
                };
                Ok(fpart * two_n_weight(*ell, a))
            }
            WeightSystem::Custom { map } => map.get(a).copied().ok_or_else(|| {
                ChaosError::Index(MultiIndexError::UnsupportedIndex {
                    position: a.max_position(),
                    max_dim: 0,
                })
            }),
        }
    }
}

/// Sparse chaos expansion: a map from multi-index to coefficient array
/// of a fixed shape, confined to a truncation box.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosExpansion {
    shape: CoefShape,
    bounds: TruncationBox,
    terms: BTreeMap<MultiIndex, Vec<f64>>,
}

impl ChaosExpansion {
    pub fn new(shape: CoefShape, bounds: TruncationBox) -> Result<Self, ChaosError> {
        shape.validate()?;
        Ok(Self {
            shape,
            bounds,
            terms: BTreeMap::new(),
        })
    }

    pub fn shape(&self) -> CoefShape {
        self.shape
    }

    pub fn bounds(&self) -> TruncationBox {
        self.bounds
    }

    /// Stores a coefficient. Exact-zero arrays are pruned; any previously
    /// stored value at the index is replaced.
    pub fn insert(&mut self, a: MultiIndex, coef: Vec<f64>) -> Result<(), ChaosError> {
        if coef.len() != self.shape.len() {
            return Err(ChaosError::BadCoefficientLength {
                expected: self.shape.len(),
                got: coef.len(),
            });
        }
        if coef.iter().any(|x| !x.is_finite()) {
            return Err(ChaosError::NonFiniteCoefficient);
        }
        if !self.bounds.contains(&a) {
            return Err(ChaosError::OutsideBox {
                index: a.to_string(),
                k: self.bounds.k,
                n: self.bounds.n,
            });
        }
        if coef.iter().all(|&x| x == 0.0) {
            self.terms.remove(&a);
        } else {
            self.terms.insert(a, coef);
        }
        Ok(())
    }

    pub fn coefficient(&self, a: &MultiIndex) -> Option<&[f64]> {
        self.terms.get(a).map(Vec::as_slice)
    }

    /// Stored terms in canonical index order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &[f64])> {
        self.terms.iter().map(|(a, c)| (a, c.as_slice()))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest position appearing in the support (0 when empty).
    pub fn support_max_position(&self) -> u32 {
        self.terms.keys().map(MultiIndex::max_position).max().unwrap_or(0)
    }

    /// Largest total degree appearing in the support (0 when empty).
    pub fn support_max_degree(&self) -> u32 {
        self.terms.keys().map(|a| a.degree() as u32).max().unwrap_or(0)
    }

    /// `ca * self + cb * other`, on the hull of the two boxes.
    pub fn add_scaled(
        &self,
        other: &Self,
        ca: f64,
        cb: f64,
    ) -> Result<Self, ChaosError> {
        if self.shape != other.shape {
            return Err(ChaosError::ShapeMismatch(format!(
                "cannot combine {:?} with {:?}",
                self.shape, other.shape
            )));
        }
        let mut out = Self::new(self.shape, self.bounds.hull(&other.bounds))?;
        let indices: std::collections::BTreeSet<&MultiIndex> =
            self.terms.keys().chain(other.terms.keys()).collect();
        for a in indices {
            let mut coef = vec![0.0; self.shape.len()];
            if let Some(c) = self.terms.get(a) {
                for (slot, &x) in coef.iter_mut().zip(c) {
                    *slot += ca * x;
                }
            }
            if let Some(c) = other.terms.get(a) {
                for (slot, &x) in coef.iter_mut().zip(c) {
                    *slot += cb * x;
                }
            }
            out.insert(a.clone(), coef)?;
        }
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        if c == 0.0 {
            out.terms.clear();
            return out;
        }
        for coef in out.terms.values_mut() {
            for x in coef.iter_mut() {
                *x *= c;
            }
        }
        out
    }

    /// Truncated white noise `W_K = sum_{k<=K} xi_k u_k`: the U-valued
    /// expansion (Scalar shape with dx = K) whose coefficient at `eps(k)`
    /// is the k-th standard basis vector, and nothing else.
    pub fn white_noise(k: u32) -> Self {
        let dims = k as usize;
        let mut out = Self::new(CoefShape::Scalar { dx: dims.max(1) }, TruncationBox::new(k, 1))
            .expect("valid shape");
        for j in 1..=k {
            let mut coef = vec![0.0; dims];
            coef[j as usize - 1] = 1.0;
            out.insert(MultiIndex::epsilon(j), coef).expect("inside box");
        }
        out
    }

    /// Reinterprets a U-valued (Scalar dx = du) expansion as an
    /// `R (x) U`-valued integrand (Tensor 1 x du); same layout.
    pub fn to_integrand(&self) -> Result<Self, ChaosError> {
        let CoefShape::Scalar { dx } = self.shape else {
            return Err(ChaosError::ShapeMismatch(
                "only a Scalar expansion can be viewed as a 1 x du integrand".into(),
            ));
        };
        Ok(Self {
            shape: CoefShape::Tensor { dx: 1, du: dx },
            bounds: self.bounds,
            terms: self.terms.clone(),
        })
    }

    /// Scalar(dx) viewed as a single-column tensor (dx x 1); same layout.
    pub fn to_column_tensor(&self) -> Result<Self, ChaosError> {
        let CoefShape::Scalar { dx } = self.shape else {
            return Err(ChaosError::ShapeMismatch(
                "only a Scalar expansion has a column-tensor view".into(),
            ));
        };
        Ok(Self {
            shape: CoefShape::Tensor { dx, du: 1 },
            bounds: self.bounds,
            terms: self.terms.clone(),
        })
    }

    /// Tensor(dx x 1) collapsed back to Scalar(dx); same layout.
    pub fn from_column_tensor(&self) -> Result<Self, ChaosError> {
        let CoefShape::Tensor { dx, du: 1 } = self.shape else {
            return Err(ChaosError::ShapeMismatch(
                "only a single-column tensor collapses to a Scalar expansion".into(),
            ));
        };
        Ok(Self {
            shape: CoefShape::Scalar { dx },
            bounds: self.bounds,
            terms: self.terms.clone(),
        })
    }

    /// Pathwise evaluation `sum_a v_a xi_a(x)`, canonical order with
    /// compensated accumulation per component.
    pub fn evaluate(&self, sample: &GaussianSample) -> Result<Vec<f64>, ChaosError> {
        if (sample.coords.len() as u32) < self.bounds.k {
            return Err(ChaosError::Index(MultiIndexError::UnsupportedIndex {
                position: self.bounds.k,
                max_dim: sample.coords.len() as u32,
            }));
        }
        let mut acc = CompensatedVec::zeros(self.shape.len());
        for (a, coef) in self.terms() {
            let basis = xi_alpha(a, sample)?;
            for (i, &c) in coef.iter().enumerate() {
                acc.add(i, c * basis);
            }
        }
        Ok(acc.into_vec())
    }

    /// Weighted norm `sqrt(sum_a r_a^2 |v_a|^2)`; Euclidean/Frobenius
    /// coefficient norm, canonical order, compensated.
    pub fn weighted_norm(&self, w: &WeightSystem) -> Result<f64, ChaosError> {
        let mut acc = CompensatedSum::new();
        for (a, coef) in self.terms() {
            let r = w.weight(a)?;
            let norm_sq: f64 = coef.iter().map(|&x| x * x).sum();
            acc.add(r * r * norm_sq);
        }
        Ok(acc.value().max(0.0).sqrt())
    }

    /// Squared unweighted norm `sum_a |v_a|^2`.
    pub fn norm_squared(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        for (_, coef) in self.terms() {
            acc.add(coef.iter().map(|&x| x * x).sum());
        }
        acc.value()
    }

    /// Weights from the summability construction: on every index of the
    /// expansion's box, `r_a = (2N)^{-a} / (1 + |f_a|)`, which makes
    /// `sum_a r_a^2 |f_a|^2` finite by comparison with `sum_a (2N)^{-2a}`.
    pub fn suggest_weights(&self) -> WeightSystem {
        let mut map = BTreeMap::new();
        for a in self.bounds.enumerate() {
            let norm = self
                .coefficient(&a)
                .map(|c| c.iter().map(|&x| x * x).sum::<f64>().sqrt())
                .unwrap_or(0.0);
            map.insert(a.clone(), two_n_weight(-1.0, &a) / (1.0 + norm));
        }
        WeightSystem::Custom { map }
    }

    /// Serializes to the expansion JSON form (terms in canonical order,
    /// shortest round-trip decimals).
    pub fn to_json(&self) -> Result<String, ChaosError> {
        Ok(serde_json::to_string_pretty(&ExpansionFile::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self, ChaosError> {
        let file: ExpansionFile = serde_json::from_str(text)?;
        file.into_expansion()
    }
}

/// Duality pairing `<u, v> = sum_a (u_a, v_a)`, over the shared support
/// in canonical order. Both built-in weighted-space pairings evaluate to
/// exactly this coefficient sum; the weights only decide which pair of
/// spaces the number is finite for.
pub fn duality_pairing(u: &ChaosExpansion, v: &ChaosExpansion) -> Result<f64, ChaosError> {
    if u.shape != v.shape {
        return Err(ChaosError::ShapeMismatch(format!(
            "pairing requires equal shapes, got {:?} and {:?}",
            u.shape, v.shape
        )));
    }
    let mut acc = CompensatedSum::new();
    let mut iter_u = u.terms.iter().peekable();
    let mut iter_v = v.terms.iter().peekable();
    while let (Some(&(ka, ca)), Some(&(kb, cb))) = (iter_u.peek(), iter_v.peek()) {
        match ka.cmp(kb) {
            std::cmp::Ordering::Less => {
                iter_u.next();
            }
            std::cmp::Ordering::Greater => {
                iter_v.next();
            }
            std::cmp::Ordering::Equal => {
                let dot: f64 = ca.iter().zip(cb).map(|(&x, &y)| x * y).sum();
                acc.add(dot);
                iter_u.next();
                iter_v.next();
            }
        }
    }
    Ok(acc.value())
}

/// On-disk JSON form of an expansion.
#[derive(Serialize, Deserialize)]
struct ExpansionFile {
    shape: CoefShape,
    #[serde(rename = "box")]
    bounds: TruncationBox,
    terms: Vec<TermFile>,
}

#[derive(Serialize, Deserialize)]
struct TermFile {
    alpha: Vec<(u32, u32)>,
    coef: serde_json::Value,
}

impl From<&ChaosExpansion> for ExpansionFile {
    fn from(v: &ChaosExpansion) -> Self {
        let terms = v
            .terms()
            .map(|(a, coef)| {
                let value = match v.shape {
                    CoefShape::Scalar { .. } => serde_json::json!(coef),
                    CoefShape::Tensor { du, .. } => {
                        let rows: Vec<&[f64]> = coef.chunks(du).collect();
                        serde_json::json!(rows)
                    }
                };
                TermFile {
                    alpha: a.entries().to_vec(),
                    coef: value,
                }
            })
            .collect();
        ExpansionFile {
            shape: v.shape,
            bounds: v.bounds,
            terms,
        }
    }
}

impl ExpansionFile {
    fn into_expansion(self) -> Result<ChaosExpansion, ChaosError> {
        let mut out = ChaosExpansion::new(self.shape, self.bounds)?;
        for term in self.terms {
            let a = MultiIndex::from_pairs(&term.alpha)?;
            let coef = match self.shape {
                CoefShape::Scalar { dx } => {
                    let values: Vec<f64> = serde_json::from_value(term.coef)?;
                    if values.len() != dx {
                        return Err(ChaosError::BadCoefficientLength {
                            expected: dx,
                            got: values.len(),
                        });
                    }
                    values
                }
                CoefShape::Tensor { dx, du } => {
                    let rows: Vec<Vec<f64>> = serde_json::from_value(term.coef)?;
                    if rows.len() != dx || rows.iter().any(|r| r.len() != du) {
                        return Err(ChaosError::Malformed(format!(
                            "tensor coefficient must be {dx} rows of {du}"
                        )));
                    }
                    rows.into_iter().flatten().collect()
                }
            };
            out.insert(a, coef)?;
        }
        Ok(out)
    }
}
