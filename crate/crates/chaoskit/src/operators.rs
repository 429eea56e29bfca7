//! The derivative, divergence (Skorokhod), and Ornstein-Uhlenbeck
//! operators with generalized drivers, the Wick product, and their
//! white-noise and one-dimensional specializations.
//!
//! On coefficients, with `C` the componentwise binomial:
//!
//! ```text
//! (D_u v)_a   = sum_b sqrt(C(a+b, b)) v_{a+b} (x) u_b
//! (delta_u f)_a = sum_{b <= a} sqrt(C(a, b)) (f_b, u_{a-b})_U
//! (L_u v)_a   = sum_{b <= a} sum_g sqrt(C(a,b) C(b+g,b)) v_{b+g} (u_g, u_{a-b})_U
//! (f <> eta)_a  = sum_{b <= a} sqrt(C(a, b)) f_{a-b} eta_b
//! ```
//!
//! The divergence sum is finite for every index; the derivative and
//! Ornstein-Uhlenbeck inner sums are finite only at truncation, and in
//! the untruncated limit their well-definedness is conditional on the
//! driver and operand. Callers choose the output truncation box
//! explicitly; coefficients at indices outside it are not computed.
//! [`required_box`] returns a box guaranteed to hold the algebraically
//! exact support, for tests and compositions that must be loss-free.
//!
//! Every inner sum accumulates in canonical index order with compensated
//! summation, and parallel application over output indices is bitwise
//! identical for any worker count.

use rayon::prelude::*;

use crate::chaos::{ChaosError, ChaosExpansion, CoefShape, TruncationBox};
use crate::multiindex::{sqrt_binomial, sqrt_binomial_product, MultiIndex};
use crate::sum::CompensatedVec;

/// The four operator kinds exposed by the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Derivative,
    Skorokhod,
    OrnsteinUhlenbeck,
    Wick,
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::Derivative => "derivative",
            OperatorKind::Skorokhod => "skorokhod",
            OperatorKind::OrnsteinUhlenbeck => "ornstein-uhlenbeck",
            OperatorKind::Wick => "wick",
        }
    }
}

/// A fully specified operator application: driver (integrator), operand,
/// and output truncation box.
#[derive(Debug, Clone)]
pub struct OperatorRequest {
    pub kind: OperatorKind,
    pub driver: ChaosExpansion,
    pub operand: ChaosExpansion,
    pub output_box: TruncationBox,
}

impl OperatorRequest {
    pub fn apply(&self) -> Result<ChaosExpansion, ChaosError> {
        match self.kind {
            OperatorKind::Derivative => malliavin_d(&self.driver, &self.operand, self.output_box),
            OperatorKind::Skorokhod => skorokhod(&self.driver, &self.operand, self.output_box),
            OperatorKind::OrnsteinUhlenbeck => {
                ornstein_uhlenbeck(&self.driver, &self.operand, self.output_box)
            }
            OperatorKind::Wick => wick(&self.operand, &self.driver, self.output_box),
        }
    }
}

/// Smallest box guaranteed to contain the exact support of the result.
///
/// The derivative never leaves the operand's support hull (its output
/// indices are dominated by operand indices); the creation-type
/// operators can raise degree by the driver's top degree.
pub fn required_box(
    kind: OperatorKind,
    driver: &ChaosExpansion,
    operand: &ChaosExpansion,
) -> TruncationBox {
    let k_op = operand.support_max_position();
    let n_op = operand.support_max_degree();
    let k_dr = driver.support_max_position();
    let n_dr = driver.support_max_degree();
    match kind {
        OperatorKind::Derivative => TruncationBox::new(k_op, n_op),
        OperatorKind::Skorokhod | OperatorKind::Wick | OperatorKind::OrnsteinUhlenbeck => {
            TruncationBox::new(k_op.max(k_dr), n_op + n_dr)
        }
    }
}

fn require_scalar(e: &ChaosExpansion, role: &str) -> Result<usize, ChaosError> {
    match e.shape() {
        CoefShape::Scalar { dx } => Ok(dx),
        other => Err(ChaosError::ShapeMismatch(format!(
            "{role} must have Scalar shape, got {other:?}"
        ))),
    }
}

fn require_tensor(e: &ChaosExpansion, role: &str) -> Result<(usize, usize), ChaosError> {
    match e.shape() {
        CoefShape::Tensor { dx, du } => Ok((dx, du)),
        other => Err(ChaosError::ShapeMismatch(format!(
            "{role} must have Tensor shape, got {other:?}"
        ))),
    }
}

/// Applies `per_index` to every index of `out_box` (in parallel for
/// large boxes) and assembles the pruned expansion. Each coefficient is
/// computed independently, so the result does not depend on the worker
/// count.
fn assemble<F>(
    shape: CoefShape,
    out_box: TruncationBox,
    per_index: F,
) -> Result<ChaosExpansion, ChaosError>
where
    F: Fn(&MultiIndex) -> Vec<f64> + Sync,
{
    let indices = out_box.enumerate();
    let computed: Vec<(MultiIndex, Vec<f64>)> = if indices.len() >= 64 {
        indices
            .into_par_iter()
            .map(|a| {
                let coef = per_index(&a);
                (a, coef)
            })
            .collect()
    } else {
        indices
            .into_iter()
            .map(|a| {
                let coef = per_index(&a);
                (a, coef)
            })
            .collect()
    };
    let mut out = ChaosExpansion::new(shape, out_box)?;
    for (a, coef) in computed {
        out.insert(a, coef)?;
    }
    Ok(out)
}

/// Derivative of `v` (Scalar dx) along the driver `u` (Scalar du):
/// an `X (x) U`-valued expansion on `out_box`.
///
/// The inner sum enumerates `a + b` over the support of `v` rather than
/// `b` over a box, which keeps the cost at O(|supp v| * |out|); shifting
/// by a fixed index preserves canonical order, so this IS the canonical
/// `b`-order.
pub fn malliavin_d(
    u: &ChaosExpansion,
    v: &ChaosExpansion,
    out_box: TruncationBox,
) -> Result<ChaosExpansion, ChaosError> {
    let du = require_scalar(u, "driver")?;
    let dx = require_scalar(v, "operand of the derivative")?;
    let shape = CoefShape::Tensor { dx, du };
    assemble(shape, out_box, |a| {
        let mut acc = CompensatedVec::zeros(dx * du);
        for (gamma, v_coef) in v.terms() {
            let Some(b) = gamma.sub_checked(a) else { continue };
            let Some(u_coef) = u.coefficient(&b) else { continue };
            let w = sqrt_binomial(gamma, &b);
            for (i, &vi) in v_coef.iter().enumerate() {
                let wv = w * vi;
                for (j, &uj) in u_coef.iter().enumerate() {
                    acc.add(i * du + j, wv * uj);
                }
            }
        }
        acc.into_vec()
    })
}

/// Skorokhod integral of the integrand `f` (Tensor dx x du) against the
/// driver `u` (Scalar du): an `X`-valued expansion on `out_box`.
pub fn skorokhod(
    u: &ChaosExpansion,
    f: &ChaosExpansion,
    out_box: TruncationBox,
) -> Result<ChaosExpansion, ChaosError> {
    let du = require_scalar(u, "driver")?;
    let (dx, du_f) = require_tensor(f, "integrand")?;
    if du != du_f {
        return Err(ChaosError::ShapeMismatch(format!(
            "integrand contracts over du={du_f} but the driver is du={du}"
        )));
    }
    let shape = CoefShape::Scalar { dx };
    assemble(shape, out_box, |a| {
        let mut acc = CompensatedVec::zeros(dx);
        for (b, f_coef) in f.terms() {
            let Some(rest) = a.sub_checked(b) else { continue };
            let Some(u_coef) = u.coefficient(&rest) else { continue };
            let w = sqrt_binomial(a, b);
            for i in 0..dx {
                let mut dot = 0.0;
                for (j, &uj) in u_coef.iter().enumerate() {
                    dot += f_coef[i * du + j] * uj;
                }
                acc.add(i, w * dot);
            }
        }
        acc.into_vec()
    })
}

/// Ornstein-Uhlenbeck operator `L_u(v)` on `out_box`; `v` Scalar dx,
/// driver Scalar du. Equals `delta_u(D_u(v))` whenever the intermediate
/// box holds the derivative's full support.
pub fn ornstein_uhlenbeck(
    u: &ChaosExpansion,
    v: &ChaosExpansion,
    out_box: TruncationBox,
) -> Result<ChaosExpansion, ChaosError> {
    let _du = require_scalar(u, "driver")?;
    let dx = require_scalar(v, "operand of the Ornstein-Uhlenbeck operator")?;
    let shape = CoefShape::Scalar { dx };
    assemble(shape, out_box, |a| {
        // b runs over indices with a - b in supp(u), sorted canonically.
        let mut bs: Vec<(MultiIndex, &[f64])> = u
            .terms()
            .filter_map(|(delta, u_rest)| a.sub_checked(delta).map(|b| (b, u_rest)))
            .collect();
        bs.sort_by(|x, y| x.0.cmp(&y.0));
        let mut acc = CompensatedVec::zeros(dx);
        for (b, u_rest) in bs {
            for (g, u_g) in u.terms() {
                let bg = b.add(g);
                let Some(v_coef) = v.coefficient(&bg) else { continue };
                let dot: f64 = u_g.iter().zip(u_rest).map(|(&x, &y)| x * y).sum();
                if dot == 0.0 {
                    continue;
                }
                let w = sqrt_binomial_product(a, &b, &bg, &b);
                let wd = w * dot;
                for (i, &vi) in v_coef.iter().enumerate() {
                    acc.add(i, wd * vi);
                }
            }
        }
        acc.into_vec()
    })
}

/// Wick product `f <> eta` of an X-valued `f` with a real-valued `eta`
/// (Scalar 1), on `out_box`.
///
/// The sum is arranged over the f-side index, the same enumeration the
/// Skorokhod integral uses; with a real-valued driver the two operators
/// produce identical coefficients term for term.
pub fn wick(
    f: &ChaosExpansion,
    eta: &ChaosExpansion,
    out_box: TruncationBox,
) -> Result<ChaosExpansion, ChaosError> {
    let dx = require_scalar(f, "left Wick factor")?;
    let d_eta = require_scalar(eta, "right Wick factor")?;
    if d_eta != 1 {
        return Err(ChaosError::ShapeMismatch(format!(
            "the real-valued Wick factor must be Scalar(1), got Scalar({d_eta})"
        )));
    }
    let shape = CoefShape::Scalar { dx };
    assemble(shape, out_box, |a| {
        let mut acc = CompensatedVec::zeros(dx);
        for (g, f_coef) in f.terms() {
            let Some(b) = a.sub_checked(g) else { continue };
            let Some(eta_coef) = eta.coefficient(&b) else { continue };
            let w = sqrt_binomial(a, g);
            for (i, &fi) in f_coef.iter().enumerate() {
                acc.add(i, w * (fi * eta_coef[0]));
            }
        }
        acc.into_vec()
    })
}

/// White-noise derivative oracle: `(D v)_a = sum_k sqrt(a_k + 1)
/// v_{a+eps(k)} (x) u_k`, computed directly on the operand's box with
/// `du = K`. Serves as an independent check of [`malliavin_d`] driven by
/// the truncated white noise.
pub fn white_noise_d(v: &ChaosExpansion) -> Result<ChaosExpansion, ChaosError> {
    let dx = require_scalar(v, "operand of the white-noise derivative")?;
    let bounds = v.bounds();
    let du = bounds.k as usize;
    if du == 0 {
        return Err(ChaosError::ShapeMismatch(
            "white-noise operators need a box with K >= 1".into(),
        ));
    }
    let shape = CoefShape::Tensor { dx, du };
    assemble(shape, bounds, |a| {
        let mut coef = vec![0.0; dx * du];
        for k in 1..=bounds.k {
            let shifted = a.add(&MultiIndex::epsilon(k));
            let Some(v_next) = v.coefficient(&shifted) else { continue };
            let w = f64::from(a.get(k) + 1).sqrt();
            for i in 0..dx {
                coef[i * du + (k as usize - 1)] = w * v_next[i];
            }
        }
        coef
    })
}

/// White-noise divergence oracle: `(delta f)_a = sum_k sqrt(a_k)
/// f_{k, a-eps(k)}`, on the integrand's box; requires `du = K`.
/// Accumulation follows ascending canonical order of `a - eps(k)`,
/// which is descending `k`.
pub fn white_noise_delta(f: &ChaosExpansion) -> Result<ChaosExpansion, ChaosError> {
    let (dx, du) = require_tensor(f, "integrand of the white-noise divergence")?;
    let bounds = f.bounds();
    if du != bounds.k as usize {
        return Err(ChaosError::ShapeMismatch(format!(
            "white-noise divergence needs du = K, got du={du}, K={}",
            bounds.k
        )));
    }
    let shape = CoefShape::Scalar { dx };
    assemble(shape, bounds, |a| {
        let mut acc = CompensatedVec::zeros(dx);
        for k in (1..=bounds.k).rev() {
            let ak = a.get(k);
            if ak == 0 {
                continue;
            }
            let below = a
                .sub_checked(&MultiIndex::epsilon(k))
                .expect("a_k >= 1 was just checked");
            let Some(f_coef) = f.coefficient(&below) else { continue };
            let w = f64::from(ak).sqrt();
            for i in 0..dx {
                acc.add(i, w * f_coef[i * du + (k as usize - 1)]);
            }
        }
        acc.into_vec()
    })
}

/// White-noise Ornstein-Uhlenbeck oracle, the number operator:
/// `(L v)_a = |a| v_a` on the operand's box.
pub fn white_noise_ou(v: &ChaosExpansion) -> Result<ChaosExpansion, ChaosError> {
    let dx = require_scalar(v, "operand of the white-noise number operator")?;
    let shape = CoefShape::Scalar { dx };
    assemble(shape, v.bounds(), |a| {
        let degree = a.degree() as f64;
        match v.coefficient(a) {
            Some(coef) => coef.iter().map(|&x| degree * x).collect(),
            None => vec![0.0; dx],
        }
    })
}

/// One-dimensional specialization: expansions in a single Gaussian
/// coordinate as plain coefficient sequences indexed by degree.
///
/// These mirror the general operators at K = 1 and serve as their
/// independent oracles, with their own scalar binomials.
pub mod oned {
    use num_traits::ToPrimitive;

    use crate::multiindex::{binomial_scalar, ln_factorial};
    use crate::sum::CompensatedSum;

    fn sqrt_binom(n: u64, k: u64) -> f64 {
        match binomial_scalar(n, k).to_u64() {
            Some(v) => (v as f64).sqrt(),
            None => (0.5
                * (ln_factorial(n as u32)
                    - (ln_factorial(k as u32) + ln_factorial((n - k) as u32))))
            .exp(),
        }
    }

    fn sqrt_binom_product(n1: u64, k1: u64, n2: u64, k2: u64) -> f64 {
        match (binomial_scalar(n1, k1) * binomial_scalar(n2, k2)).to_u64() {
            Some(v) => (v as f64).sqrt(),
            None => {
                let ln1 = ln_factorial(n1 as u32)
                    - (ln_factorial(k1 as u32) + ln_factorial((n1 - k1) as u32));
                let ln2 = ln_factorial(n2 as u32)
                    - (ln_factorial(k2 as u32) + ln_factorial((n2 - k2) as u32));
                (0.5 * (ln1 + ln2)).exp()
            }
        }
    }

    /// `(D_u v)_n = sum_k sqrt((n+k)!/(n! k!)) v_{n+k} u_k`, ascending k.
    pub fn derivative(u: &[f64], v: &[f64]) -> Vec<f64> {
        (0..v.len())
            .map(|n| {
                let mut acc = CompensatedSum::new();
                for k in 0..u.len() {
                    if n + k >= v.len() {
                        break;
                    }
                    let w = sqrt_binom((n + k) as u64, k as u64);
                    acc.add((w * v[n + k]) * u[k]);
                }
                acc.value()
            })
            .collect()
    }

    /// `(delta_u f)_n = sum_{k<=n} sqrt(n!/(k!(n-k)!)) f_k u_{n-k}`,
    /// ascending k. Output length `len(f) + len(u) - 1`.
    pub fn skorokhod(u: &[f64], f: &[f64]) -> Vec<f64> {
        if u.is_empty() || f.is_empty() {
            return Vec::new();
        }
        (0..f.len() + u.len() - 1)
            .map(|n| {
                let mut acc = CompensatedSum::new();
                for k in 0..f.len().min(n + 1) {
                    let j = n - k;
                    if j >= u.len() {
                        continue;
                    }
                    let w = sqrt_binom(n as u64, k as u64);
                    acc.add(w * (f[k] * u[j]));
                }
                acc.value()
            })
            .collect()
    }

    /// `(L_u v)_n = sum_{k<=n} sum_m sqrt(C(n,k) C(k+m,k)) v_{k+m} u_m u_{n-k}`,
    /// ascending (k, m). Output length `len(v) + len(u) - 1`.
    pub fn ornstein_uhlenbeck(u: &[f64], v: &[f64]) -> Vec<f64> {
        if u.is_empty() || v.is_empty() {
            return Vec::new();
        }
        (0..v.len() + u.len() - 1)
            .map(|n| {
                let mut acc = CompensatedSum::new();
                for k in 0..=n {
                    if n - k >= u.len() {
                        continue;
                    }
                    for m in 0..u.len() {
                        if k + m >= v.len() {
                            break;
                        }
                        let w = sqrt_binom_product(n as u64, k as u64, (k + m) as u64, k as u64);
                        let wd = w * (u[m] * u[n - k]);
                        acc.add(wd * v[k + m]);
                    }
                }
                acc.value()
            })
            .collect()
    }

    /// Sequence with a single 1 at degree 1: the bare Gaussian coordinate
    /// as a driver.
    pub fn xi_driver(len: usize) -> Vec<f64> {
        let mut u = vec![0.0; len.max(2)];
        u[1] = 1.0;
        u
    }

    #[cfg(test)]
    mod tests {
        use super::*;

        #[test]
        fn xi_driver_closed_forms() {
            let v: Vec<f64> = (0..8).map(|n| 1.0 / (1.0 + n as f64)).collect();
            let u = xi_driver(8);

            let d = derivative(&u, &v);
            for n in 0..v.len() - 1 {
                let expect = ((n + 1) as f64).sqrt() * v[n + 1];
                assert_eq!(d[n], expect, "derivative closed form at {n}");
            }

            // The divergence shifts the index up: coefficient n picks up
            // sqrt(n) f_{n-1}, the creation-operator form of the same
            // display written on the integrand side.
            let f: Vec<f64> = (0..8).map(|n| (n as f64) * 0.25 - 0.6).collect();
            let s = skorokhod(&u, &f);
            assert_eq!(s[0], 0.0);
            for n in 1..f.len() + 1 {
                let expect = (n as f64).sqrt() * f[n - 1];
                assert!((s[n] - expect).abs() <= 1e-15 * expect.abs().max(1.0));
            }

            let l = ornstein_uhlenbeck(&u, &v);
            for n in 0..v.len() {
                assert_eq!(l[n], n as f64 * v[n], "number operator at {n}");
            }
        }

        #[test]
        fn empty_inputs() {
            assert!(skorokhod(&[], &[1.0]).is_empty());
            assert!(ornstein_uhlenbeck(&[1.0], &[]).is_empty());
            assert_eq!(derivative(&[1.0], &[2.0]), vec![2.0]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::duality_pairing;
    use crate::multiindex::enumerate_box;

    fn basis_expansion(a: &MultiIndex, bounds: TruncationBox) -> ChaosExpansion {
        let mut e = ChaosExpansion::new(CoefShape::Scalar { dx: 1 }, bounds).unwrap();
        e.insert(a.clone(), vec![1.0]).unwrap();
        e
    }

    #[test]
    fn derivative_on_basis_pair() {
        // D along xi_{e1} applied to xi_{2 e1} gives sqrt(2) xi_{e1}.
        let bounds = TruncationBox::new(1, 2);
        let u = basis_expansion(&MultiIndex::epsilon(1), TruncationBox::new(1, 1));
        let v = basis_expansion(&MultiIndex::single(1, 2), bounds);
        let d = malliavin_d(&u, &v, required_box(OperatorKind::Derivative, &u, &v)).unwrap();
        assert_eq!(d.num_terms(), 1);
        let coef = d.coefficient(&MultiIndex::epsilon(1)).unwrap();
        assert_eq!(coef, &[2f64.sqrt()]);
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let bounds = TruncationBox::new(2, 2);
        let u = ChaosExpansion::white_noise(2);
        let mut v = ChaosExpansion::new(CoefShape::Scalar { dx: 3 }, bounds).unwrap();
        v.insert(MultiIndex::zero(), vec![1.0, 2.0, 3.0]).unwrap();
        let d = malliavin_d(&u, &v, bounds).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn skorokhod_of_white_noise_against_itself() {
        // delta_W(W) has coefficient sqrt(2) at each 2 eps(k).
        let k = 3u32;
        let wn = ChaosExpansion::white_noise(k);
        let integrand = wn.to_integrand().unwrap();
        let out = required_box(OperatorKind::Skorokhod, &wn, &integrand);
        let delta = skorokhod(&wn, &integrand, out).unwrap();
        assert_eq!(delta.num_terms(), k as usize);
        for j in 1..=k {
            let coef = delta.coefficient(&MultiIndex::single(j, 2)).unwrap();
            assert_eq!(coef, &[2f64.sqrt()]);
        }
    }

    #[test]
    fn skorokhod_with_deterministic_driver() {
        // With only u_(0) stored, (delta_u f)_a = (f_a, u_(0)).
        let bounds = TruncationBox::new(2, 2);
        let mut u = ChaosExpansion::new(CoefShape::Scalar { dx: 2 }, TruncationBox::new(0, 0))
            .unwrap();
        u.insert(MultiIndex::zero(), vec![0.5, -2.0]).unwrap();
        let mut f = ChaosExpansion::new(CoefShape::Tensor { dx: 1, du: 2 }, bounds).unwrap();
        f.insert(MultiIndex::epsilon(2), vec![3.0, 1.0]).unwrap();
        f.insert(MultiIndex::zero(), vec![1.0, 1.0]).unwrap();
        let delta = skorokhod(&u, &f, bounds).unwrap();
        assert_eq!(delta.coefficient(&MultiIndex::epsilon(2)).unwrap(), &[
            3.0 * 0.5 + 1.0 * -2.0
        ]);
        assert_eq!(delta.coefficient(&MultiIndex::zero()).unwrap(), &[-1.5]);
    }

    #[test]
    fn skorokhod_creation_on_basis_integrand() {
        // h (x) u_k xi_a integrated against white noise gives
        // h sqrt(a_k + 1) xi_{a + eps(k)}.
        let k_dim = 2u32;
        let wn = ChaosExpansion::white_noise(k_dim);
        let a = MultiIndex::single(1, 2);
        let h = [0.7, -1.1, 0.4];
        let bounds = TruncationBox::new(k_dim, 3);
        let mut f = ChaosExpansion::new(
            CoefShape::Tensor { dx: 3, du: k_dim as usize },
            TruncationBox::new(k_dim, 2),
        )
        .unwrap();
        // column k = 1 holds h
        f.insert(a.clone(), vec![h[0], 0.0, h[1], 0.0, h[2], 0.0]).unwrap();
        let delta = skorokhod(&wn, &f, bounds).unwrap();
        assert_eq!(delta.num_terms(), 1);
        let target = a.add(&MultiIndex::epsilon(1));
        let coef = delta.coefficient(&target).unwrap();
        let w = 3f64.sqrt();
        for (got, h_i) in coef.iter().zip(h) {
            assert_eq!(*got, w * h_i);
        }
    }

    #[test]
    fn ou_fixes_white_noise() {
        let k = 3u32;
        let wn = ChaosExpansion::white_noise(k);
        let out = required_box(OperatorKind::OrnsteinUhlenbeck, &wn, &wn);
        let l = ornstein_uhlenbeck(&wn, &wn, out).unwrap();
        for (a, coef) in wn.terms() {
            assert_eq!(l.coefficient(a).unwrap(), coef);
        }
        assert_eq!(l.num_terms(), wn.num_terms());
    }

    #[test]
    fn ou_on_basis_pair() {
        // L along xi_{e1} applied to xi_{2 e1} multiplies by C(2e1, e1) = 2.
        let u = basis_expansion(&MultiIndex::epsilon(1), TruncationBox::new(1, 1));
        let v = basis_expansion(&MultiIndex::single(1, 2), TruncationBox::new(1, 2));
        let out = required_box(OperatorKind::OrnsteinUhlenbeck, &u, &v);
        let l = ornstein_uhlenbeck(&u, &v, out).unwrap();
        assert_eq!(l.coefficient(&MultiIndex::single(1, 2)).unwrap(), &[2.0]);
        assert_eq!(l.num_terms(), 1);
    }

    #[test]
    fn wick_on_basis_pair() {
        // xi_{e1} <> xi_{e1} = sqrt(2) xi_{2 e1}.
        let eta = basis_expansion(&MultiIndex::epsilon(1), TruncationBox::new(1, 1));
        let out = required_box(OperatorKind::Wick, &eta, &eta);
        let w = wick(&eta, &eta, out).unwrap();
        assert_eq!(w.num_terms(), 1);
        assert_eq!(
            w.coefficient(&MultiIndex::single(1, 2)).unwrap(),
            &[2f64.sqrt()]
        );
    }

    #[test]
    fn wick_with_unit_is_identity() {
        let bounds = TruncationBox::new(2, 2);
        let mut f = ChaosExpansion::new(CoefShape::Scalar { dx: 2 }, bounds).unwrap();
        f.insert(MultiIndex::epsilon(1), vec![1.5, -0.5]).unwrap();
        f.insert(MultiIndex::single(2, 2), vec![0.25, 1.0]).unwrap();
        let one = basis_expansion(&MultiIndex::zero(), TruncationBox::new(0, 0));
        let w = wick(&f, &one, bounds).unwrap();
        assert_eq!(w, f);
    }

    #[test]
    fn white_noise_oracles_on_basis_elements() {
        let bounds = TruncationBox::new(2, 2);
        let v = basis_expansion(&MultiIndex::single(1, 2), bounds);
        let l = white_noise_ou(&v).unwrap();
        assert_eq!(l.coefficient(&MultiIndex::single(1, 2)).unwrap(), &[2.0]);

        let mut constant = ChaosExpansion::new(CoefShape::Scalar { dx: 2 }, bounds).unwrap();
        constant.insert(MultiIndex::zero(), vec![1.0, -1.0]).unwrap();
        assert!(white_noise_d(&constant).unwrap().is_zero());

        // h (x) u_1 at the zero index integrates to h xi_{e1}.
        let mut f =
            ChaosExpansion::new(CoefShape::Tensor { dx: 2, du: 2 }, bounds).unwrap();
        f.insert(MultiIndex::zero(), vec![0.3, 0.0, -0.9, 0.0]).unwrap();
        let delta = white_noise_delta(&f).unwrap();
        assert_eq!(delta.num_terms(), 1);
        assert_eq!(delta.coefficient(&MultiIndex::epsilon(1)).unwrap(), &[0.3, -0.9]);
    }

    #[test]
    fn creation_annihilation_on_a_box() {
        // D_{xi_k} xi_a = sqrt(a_k) xi_{a - eps(k)} and
        // delta_{xi_k} xi_a = sqrt(a_k + 1) xi_{a + eps(k)}, exactly.
        let bounds = TruncationBox::new(2, 3);
        let out_up = TruncationBox::new(2, 4);
        for k in 1..=2u32 {
            let driver = basis_expansion(&MultiIndex::epsilon(k), TruncationBox::new(2, 1));
            for a in enumerate_box(2, 3) {
                let v = basis_expansion(&a, bounds);
                let d = malliavin_d(&driver, &v, bounds).unwrap();
                match a.sub_checked(&MultiIndex::epsilon(k)) {
                    Some(down) => {
                        assert_eq!(d.num_terms(), 1);
                        assert_eq!(
                            d.coefficient(&down).unwrap(),
                            &[f64::from(a.get(k)).sqrt()]
                        );
                    }
                    None => assert!(d.is_zero()),
                }

                let delta = skorokhod(&driver, &v.to_column_tensor().unwrap(), out_up).unwrap();
                let up = a.add(&MultiIndex::epsilon(k));
                assert_eq!(delta.num_terms(), 1);
                assert_eq!(
                    delta.coefficient(&up).unwrap(),
                    &[f64::from(a.get(k) + 1).sqrt()]
                );
            }
        }
    }

    #[test]
    fn derivative_is_not_symmetric_in_its_arguments() {
        // D_{xi_{e1}}(xi_{2e1}) = sqrt(2) xi_{e1}, while
        // D_{xi_{2e1}}(xi_{e1}) = 0: the basis pair is a witness.
        let small = TruncationBox::new(1, 2);
        let u = basis_expansion(&MultiIndex::epsilon(1), small);
        let v = basis_expansion(&MultiIndex::single(1, 2), small);
        let d_uv = malliavin_d(&u, &v, small).unwrap();
        let d_vu = malliavin_d(&v, &u, small).unwrap();
        assert!(!d_uv.is_zero());
        assert!(d_vu.is_zero());
    }

    #[test]
    fn shape_validation() {
        let bounds = TruncationBox::new(1, 1);
        let scalar = basis_expansion(&MultiIndex::zero(), bounds);
        let tensor = scalar.to_column_tensor().unwrap();
        assert!(malliavin_d(&scalar, &tensor, bounds).is_err());
        assert!(skorokhod(&scalar, &scalar, bounds).is_err());
        assert!(ornstein_uhlenbeck(&scalar, &tensor, bounds).is_err());
        let wide = ChaosExpansion::white_noise(2);
        assert!(wick(&scalar, &wide, bounds).is_err());
        // contraction width mismatch
        let f = ChaosExpansion::new(CoefShape::Tensor { dx: 1, du: 3 }, bounds).unwrap();
        assert!(skorokhod(&wide, &f, bounds).is_err());
    }

    #[test]
    fn adjointness_with_loss_free_boxes() {
        use rand::Rng;
        let mut rng = <rand_chacha::ChaCha12Rng as rand::SeedableRng>::seed_from_u64(31);
        let bounds = TruncationBox::new(2, 3);
        let (dx, du) = (2usize, 2usize);
        let mut u = ChaosExpansion::new(CoefShape::Scalar { dx: du }, bounds).unwrap();
        let mut v = ChaosExpansion::new(CoefShape::Scalar { dx }, bounds).unwrap();
        let mut f = ChaosExpansion::new(CoefShape::Tensor { dx, du }, bounds).unwrap();
        for a in bounds.enumerate() {
            u.insert(a.clone(), (0..du).map(|_| rng.random_range(-1.0..1.0)).collect())
                .unwrap();
            v.insert(a.clone(), (0..dx).map(|_| rng.random_range(-1.0..1.0)).collect())
                .unwrap();
            f.insert(a, (0..dx * du).map(|_| rng.random_range(-1.0..1.0)).collect())
                .unwrap();
        }
        let delta = skorokhod(&u, &f, required_box(OperatorKind::Skorokhod, &u, &f)).unwrap();
        let deriv = malliavin_d(&u, &v, required_box(OperatorKind::Derivative, &u, &v)).unwrap();
        let lhs = duality_pairing(&delta, &v).unwrap();
        let rhs = duality_pairing(&f, &deriv).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1e-12));
    }

    #[test]
    fn composition_matches_ou() {
        use rand::Rng;
        let mut rng = <rand_chacha::ChaCha12Rng as rand::SeedableRng>::seed_from_u64(47);
        let bounds = TruncationBox::new(2, 3);
        let mut u = ChaosExpansion::new(CoefShape::Scalar { dx: 2 }, bounds).unwrap();
        let mut v = ChaosExpansion::new(CoefShape::Scalar { dx: 1 }, bounds).unwrap();
        for a in bounds.enumerate() {
            u.insert(a.clone(), vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .unwrap();
            v.insert(a, vec![rng.random_range(-1.0..1.0)]).unwrap();
        }
        let inner = malliavin_d(&u, &v, required_box(OperatorKind::Derivative, &u, &v)).unwrap();
        let out = required_box(OperatorKind::OrnsteinUhlenbeck, &u, &v);
        let composed = skorokhod(&u, &inner, out).unwrap();
        let direct = ornstein_uhlenbeck(&u, &v, out).unwrap();
        for a in out.enumerate() {
            let c = composed.coefficient(&a).map(|c| c[0]).unwrap_or(0.0);
            let d = direct.coefficient(&a).map(|c| c[0]).unwrap_or(0.0);
            assert!(
                (c - d).abs() <= 1e-12 * c.abs().max(d.abs()).max(1.0),
                "composition mismatch at {a}: {c} vs {d}"
            );
        }
    }

    #[test]
    fn truncation_is_silent_and_explicit() {
        // Coefficients outside the requested output box are simply not
        // computed; a tight box yields the same values inside it.
        let wn = ChaosExpansion::white_noise(2);
        let integrand = wn.to_integrand().unwrap();
        let tight = TruncationBox::new(2, 1);
        let full = required_box(OperatorKind::Skorokhod, &wn, &integrand);
        let small = skorokhod(&wn, &integrand, tight).unwrap();
        let big = skorokhod(&wn, &integrand, full).unwrap();
        assert!(small.is_zero()); // the sqrt(2) terms live at degree 2
        assert_eq!(big.num_terms(), 2);
    }
}
