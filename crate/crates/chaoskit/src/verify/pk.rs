//! Inclusion of power-sequence spaces into Kondratiev spaces with
//! negative parameters, and the factorial inequality its proof rests on.
//!
//! For finite dimension K, `L(q, 1)` embeds into `S(-rho, -ell)` for
//! every `rho > 0`, `ell >= rho`: the weight ratio
//!
//! ```text
//! ratio(a) = S(-rho, -ell) weight / L(min q, -1) weight
//!          = (a!)^{-rho/2} (2N)^{-ell a} r^{|a|},   r = min_k q_k
//! ```
//!
//! stays bounded by `C(r) = sup_n r^n / (n!)^{rho/2}`, using
//! `(2N)^{2a} a! >= |a|!`. The displayed inequality is scanned exactly
//! in big integers; an alternative reading with the exponent on the
//! support indicator instead of `2a` has genuine counterexamples, which
//! the scan reports rather than assuming either reading.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::chaos::TruncationBox;
use crate::multiindex::{enumerate_box, MultiIndex};
use crate::verify::VerifyError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InclusionReport {
    pub k: u32,
    pub rho: f64,
    pub ell: f64,
    pub r_min: f64,
    /// `(N, sup ratio over the box)` per requested degree bound.
    pub sup_ratios: Vec<(u32, f64)>,
    /// `C(r) = sup_n r^n / (n!)^{rho/2}` up to the largest degree.
    pub constant_analog: f64,
    /// The sup sequence stays below the constant, so the trend is bounded.
    pub bounded: bool,
    pub metadata: serde_json::Value,
}

/// Sup of the Kondratiev(-rho, -ell) to min-q power-sequence weight
/// ratio over growing boxes.
pub fn check_pk_inclusion(
    k: u32,
    rho: f64,
    ell: f64,
    q: &[f64],
    n_list: &[u32],
) -> Result<InclusionReport, VerifyError> {
    if !(rho > 0.0) {
        return Err(VerifyError::WeightViolation(format!(
            "the inclusion needs rho > 0, got {rho}"
        )));
    }
    if ell < rho {
        return Err(VerifyError::WeightViolation(format!(
            "the inclusion needs ell >= rho, got ell = {ell}, rho = {rho}"
        )));
    }
    if q.len() < k as usize || q.iter().any(|&x| !(x > 0.0)) {
        return Err(VerifyError::WeightViolation(
            "q must be positive with at least K entries".into(),
        ));
    }
    let r_min = q[..k as usize].iter().cloned().fold(f64::INFINITY, f64::min);
    let kond = crate::chaos::WeightSystem::kondratiev(-rho, -ell)?;
    let mut sup_ratios = Vec::new();
    for &n in n_list {
        let mut sup = 0.0f64;
        for a in enumerate_box(k, n) {
            let ratio = kond.weight(&a)? * r_min.powi(a.degree() as i32);
            sup = sup.max(ratio);
        }
        sup_ratios.push((n, sup));
    }
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let mut constant_analog = 0.0f64;
    let mut fact = 1.0f64;
    for n in 0..=u64::from(n_max) {
        if n > 0 {
            fact *= n as f64;
        }
        constant_analog = constant_analog.max(r_min.powi(n as i32) / fact.powf(rho / 2.0));
    }
    let final_sup = sup_ratios.last().map(|&(_, s)| s).unwrap_or(0.0);
    let bounded = final_sup <= constant_analog * (1.0 + 1e-12);
    Ok(InclusionReport {
        k,
        rho,
        ell,
        r_min,
        sup_ratios,
        constant_analog,
        bounded,
        metadata: json!({ "q": q, "n_list": n_list }),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorialInequalityReport {
    pub bounds: TruncationBox,
    /// Indices violating `(2N)^{2a} a! >= |a|!` (expected empty).
    pub counterexamples: Vec<String>,
    /// Indices violating the support-indicator misreading
    /// `prod_{a_k > 0} (2k)^2 a! >= |a|!` (nonempty, which is why the
    /// exponent must be `2a`).
    pub support_reading_counterexamples: Vec<String>,
}

fn two_n_pow_2a(a: &MultiIndex) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for &(pos, val) in a.entries() {
        acc *= BigUint::from(2 * pos).pow(2 * val);
    }
    acc
}

fn total_factorial(a: &MultiIndex) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for m in 2..=a.degree() {
        acc *= m;
    }
    acc
}

/// Exact big-integer scan of both readings of the factorial inequality
/// over a box.
pub fn factorial_inequality_scan(k: u32, n: u32) -> FactorialInequalityReport {
    let mut counterexamples = Vec::new();
    let mut support_reading = Vec::new();
    for a in enumerate_box(k, n) {
        let fact = a.factorial();
        let total = total_factorial(&a);
        if two_n_pow_2a(&a) * &fact < total {
            counterexamples.push(a.to_string());
        }
        let mut support_factor = BigUint::from(1u32);
        for &(pos, _) in a.entries() {
            support_factor *= BigUint::from(2 * pos).pow(2);
        }
        if support_factor * &fact < total {
            support_reading.push(a.to_string());
        }
    }
    FactorialInequalityReport {
        bounds: TruncationBox::new(k, n),
        counterexamples,
        support_reading_counterexamples: support_reading,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_is_one_at_zero_index() {
        let report = check_pk_inclusion(1, 1.0, 1.0, &[2.0], &[0]).unwrap();
        assert_eq!(report.sup_ratios[0].1, 1.0);
    }

    #[test]
    fn single_dimension_stays_bounded() {
        let report = check_pk_inclusion(1, 1.0, 1.0, &[2.0], &[4, 8, 16, 32]).unwrap();
        assert!(report.bounded, "sup {:?}", report.sup_ratios);
        for pair in report.sup_ratios.windows(2) {
            assert!(pair[0].1 <= pair[1].1); // nested boxes
        }
    }

    #[test]
    fn two_dimensions_trend_recorded() {
        let report =
            check_pk_inclusion(2, 0.5, 0.75, &[2.0, 3.0], &[4, 8, 16]).unwrap();
        assert_eq!(report.sup_ratios.len(), 3);
        assert!(report.bounded);
        assert!(report.constant_analog >= 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(check_pk_inclusion(1, 0.0, 1.0, &[2.0], &[4]).is_err());
        assert!(check_pk_inclusion(1, 1.0, 0.5, &[2.0], &[4]).is_err());
    }

    #[test]
    fn factorial_inequality_has_no_counterexamples() {
        let report = factorial_inequality_scan(4, 8);
        assert!(report.counterexamples.is_empty(), "{:?}", report.counterexamples);
        // The misreading fails, e.g. at (4, 4): 64 * 576 < 8!.
        assert!(!report.support_reading_counterexamples.is_empty());
        assert!(report
            .support_reading_counterexamples
            .contains(&"4e1+4e2".to_string()));
    }

    #[test]
    fn inclusion_weight_dominance_on_expansions() {
        // Any expansion with finite L(q, 1) norm has finite
        // S(-rho, -ell) norm bounded by C(r) times it, realized on a box.
        use crate::chaos::{CoefShape, WeightSystem};
        use crate::verify::instances::{hypothesis_scaled, instance_rng};
        let bounds = TruncationBox::new(2, 6);
        let q = vec![2.0, 4.0];
        let seq = WeightSystem::sequence_power(q.clone(), 1.0).unwrap();
        let v = hypothesis_scaled(
            CoefShape::Scalar { dx: 1 },
            bounds,
            &seq,
            &mut instance_rng(41, 0),
        );
        let kond = WeightSystem::kondratiev(-1.0, -1.0).unwrap();
        let report = check_pk_inclusion(2, 1.0, 1.0, &q, &[6]).unwrap();
        let lhs = v.weighted_norm(&kond).unwrap();
        let rhs = report.constant_analog * v.weighted_norm(&seq).unwrap();
        // The two norms differ by at most the ratio bound; the min-q
        // relaxation makes the constant generous.
        assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} vs {rhs}");
    }
}
