//! Multi-index series identities with closed forms.
//!
//! For a positive sequence `r` (finite here; the identities hold with
//! summable infinite sequences):
//!
//! ```text
//! sum_a r^a / a!            = exp(sum_k r_k)
//! sum_b C(a+b, b) r^b       = (prod_k 1/(1-r_k)) (1-r)^{-a},  r_k < 1
//! sum_b C(a, b) r^b         = (1+r)^a                          (finite sum)
//! ```
//!
//! The second identity with `r_k = (2k)^{-l}` also covers the
//! summability of `(2N)^{-l a}` over all indices for `l > 1`.

use serde_json::json;

use crate::chaos::TruncationBox;
use crate::multiindex::{big_to_f64, binomial, power_weight, MultiIndex};
use crate::sum::CompensatedSum;
use crate::verify::{SeriesReport, VerifyError};

/// Relative convergence tolerance for the two genuinely infinite series.
pub const SERIES_REL_TOL: f64 = 1e-8;
/// Relative tolerance for the finite binomial identity.
pub const BINOM_REL_TOL: f64 = 1e-12;

fn partial_sum_over_box<F>(bounds: &TruncationBox, term: F) -> f64
where
    F: Fn(&MultiIndex) -> f64,
{
    let mut acc = CompensatedSum::new();
    crate::multiindex::visit_box(bounds.k, bounds.n, |a| acc.add(term(a)));
    acc.value()
}

fn validate_positive(r: &[f64]) -> Result<(), VerifyError> {
    if r.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(VerifyError::WeightViolation(
            "sequence entries must be positive and finite".into(),
        ));
    }
    Ok(())
}

/// `sum_a r^a / a!` over growing boxes against `exp(sum_k r_k)`.
pub fn check_exp_sum(r: &[f64], boxes: &[TruncationBox]) -> Result<SeriesReport, VerifyError> {
    validate_positive(r)?;
    let closed_form = r.iter().sum::<f64>().exp();
    let mut partial_sums = Vec::new();
    for bounds in boxes {
        let sum = partial_sum_over_box(bounds, |a| {
            power_weight(r, 1.0, a).expect("box within sequence length")
                / big_to_f64(&a.factorial())
        });
        partial_sums.push((bounds.n, sum));
    }
    let last = partial_sums.last().map(|&(_, s)| s).unwrap_or(0.0);
    let rel_gap = (last - closed_form).abs() / closed_form.abs();
    Ok(SeriesReport {
        identity_id: "exp-sum".into(),
        partial_sums,
        closed_form,
        rel_gap,
        converged: rel_gap <= SERIES_REL_TOL,
        metadata: json!({ "r": r, "k": r.len() }),
    })
}

/// `sum_b C(a+b, b) r^b` over growing boxes against
/// `(prod_k 1/(1-r_k)) * prod_k (1-r_k)^{-a_k}`; needs every `r_k < 1`.
pub fn check_geom_sum(
    r: &[f64],
    a: &MultiIndex,
    boxes: &[TruncationBox],
) -> Result<SeriesReport, VerifyError> {
    validate_positive(r)?;
    if r.iter().any(|&x| x >= 1.0) {
        return Err(VerifyError::WeightViolation(
            "the geometric identity needs r_k < 1".into(),
        ));
    }
    if a.max_position() as usize > r.len() {
        return Err(VerifyError::WeightViolation(format!(
            "index {a} has support beyond the sequence length {}",
            r.len()
        )));
    }
    let full_product: f64 = r.iter().map(|&x| 1.0 / (1.0 - x)).product();
    let shift: f64 = a
        .entries()
        .iter()
        .map(|&(pos, val)| (1.0 - r[pos as usize - 1]).powi(-(val as i32)))
        .product();
    let closed_form = full_product * shift;

    let mut partial_sums = Vec::new();
    for bounds in boxes {
        let sum = partial_sum_over_box(bounds, |b| {
            big_to_f64(&binomial(&a.add(b), b))
                * power_weight(r, 1.0, b).expect("box within sequence length")
        });
        partial_sums.push((bounds.n, sum));
    }
    let last = partial_sums.last().map(|&(_, s)| s).unwrap_or(0.0);
    let rel_gap = (last - closed_form).abs() / closed_form.abs();
    Ok(SeriesReport {
        identity_id: "geom-sum".into(),
        partial_sums,
        closed_form,
        rel_gap,
        converged: rel_gap <= SERIES_REL_TOL,
        metadata: json!({ "r": r, "a": a, "k": r.len() }),
    })
}

/// The `r_k = (2k)^{-l}` instance of [`check_geom_sum`] at `a = (0)`:
/// summability of `(2N)^{-l a}` for `l > 1`, truncated to `k` dimensions.
pub fn check_two_n_sum(
    ell: f64,
    k: u32,
    boxes: &[TruncationBox],
) -> Result<SeriesReport, VerifyError> {
    if ell <= 1.0 {
        return Err(VerifyError::WeightViolation(format!(
            "summability of the (2N) weights needs l > 1, got {ell}"
        )));
    }
    let r: Vec<f64> = (1..=k).map(|j| (2.0 * f64::from(j)).powf(-ell)).collect();
    let mut report = check_geom_sum(&r, &MultiIndex::zero(), boxes)?;
    report.identity_id = "geom-sum-2n".into();
    report.metadata = json!({ "ell": ell, "k": k });
    Ok(report)
}

/// All indices dominated by `a`, canonical order.
pub fn dominated_indices(a: &MultiIndex) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::zero()];
    for &(pos, val) in a.entries() {
        let mut next = Vec::with_capacity(out.len() * (val as usize + 1));
        for prefix in &out {
            for v in 0..=val {
                next.push(prefix.add(&MultiIndex::single(pos, v)));
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// The finite identity `sum_{b <= a} C(a, b) r^b = prod_k (1+r_k)^{a_k}`,
/// exact to 1e-12 relative.
pub fn check_binom_sum(r: &[f64], a: &MultiIndex) -> Result<SeriesReport, VerifyError> {
    validate_positive(r)?;
    if a.max_position() as usize > r.len() {
        return Err(VerifyError::WeightViolation(format!(
            "index {a} has support beyond the sequence length {}",
            r.len()
        )));
    }
    let closed_form: f64 = a
        .entries()
        .iter()
        .map(|&(pos, val)| (1.0 + r[pos as usize - 1]).powi(val as i32))
        .product();
    let mut acc = CompensatedSum::new();
    for b in dominated_indices(a) {
        acc.add(big_to_f64(&binomial(a, &b)) * power_weight(r, 1.0, &b).expect("support checked"));
    }
    let sum = acc.value();
    let rel_gap = (sum - closed_form).abs() / closed_form.abs();
    Ok(SeriesReport {
        identity_id: "binom-sum".into(),
        partial_sums: vec![(a.degree() as u32, sum)],
        closed_form,
        rel_gap,
        converged: rel_gap <= BINOM_REL_TOL,
        metadata: json!({ "r": r, "a": a }),
    })
}
