//! Adjointness of the divergence and the derivative: the pairing
//! identity `<delta_u(f), v> = <f, D_u(v)>`, checked exactly at
//! truncation (a finite rearrangement) and by Monte Carlo.
//!
//! The weighted variants pair the same coefficient sums; the weight
//! parameters pick which dual pair of spaces hosts the identity, and
//! the membership norms are recorded in the report metadata.

use serde_json::json;

use crate::chaos::{duality_pairing, ChaosExpansion, WeightSystem};
use crate::hermite::GENERATOR_ID;
use crate::operators::{malliavin_d, required_box, skorokhod, OperatorKind};
use crate::sum::CompensatedSum;
use crate::verify::{DualityReport, McReport, VerifyError};

/// Which dual pair of weighted spaces frames the identity.
#[derive(Debug, Clone)]
pub enum DualityVariant {
    /// Plain square-integrable pairing; no membership norms recorded.
    Exact,
    /// Kondratiev frame: `u` in S(-1, -ell-p), `v` in S(1, ell+p),
    /// `f` in S(-1, ell).
    Kondratiev { ell: f64, p: f64 },
    /// Power-sequence frame under `1/p^2 + 1/q^2 = 1/r^2`:
    /// `u` in L(p, 1), `f` in L(q, 1), `v` in L(r, -1).
    SequencePower {
        p: Vec<f64>,
        q: Vec<f64>,
        r: Vec<f64>,
    },
}

impl DualityVariant {
    fn id(&self) -> &'static str {
        match self {
            DualityVariant::Exact => "adjointness-exact",
            DualityVariant::Kondratiev { .. } => "adjointness-kondratiev",
            DualityVariant::SequencePower { .. } => "adjointness-seq-space",
        }
    }

    fn membership(&self, u: &ChaosExpansion, f: &ChaosExpansion, v: &ChaosExpansion)
        -> Result<serde_json::Value, VerifyError>
    {
        Ok(match self {
            DualityVariant::Exact => json!({}),
            DualityVariant::Kondratiev { ell, p } => json!({
                "ell": ell,
                "p": p,
                "u_norm": u.weighted_norm(&WeightSystem::kondratiev(-1.0, -ell - p)?)?,
                "v_norm": v.weighted_norm(&WeightSystem::kondratiev(1.0, ell + p)?)?,
                "f_norm": f.weighted_norm(&WeightSystem::kondratiev(-1.0, *ell)?)?,
            }),
            DualityVariant::SequencePower { p, q, r } => {
                crate::verify::bounds::validate_reciprocal_square_relation(p, q, r)?;
                json!({
                    "p": p, "q": q, "r": r,
                    "u_norm": u.weighted_norm(&WeightSystem::sequence_power(p.clone(), 1.0)?)?,
                    "f_norm": f.weighted_norm(&WeightSystem::sequence_power(q.clone(), 1.0)?)?,
                    "v_norm": v.weighted_norm(&WeightSystem::sequence_power(r.clone(), -1.0)?)?,
                })
            }
        })
    }
}

/// `<delta_u(f), v>` against `<f, D_u(v)>` with loss-free output boxes.
pub fn check_duality_weighted(
    u: &ChaosExpansion,
    f: &ChaosExpansion,
    v: &ChaosExpansion,
    variant: &DualityVariant,
) -> Result<DualityReport, VerifyError> {
    let delta = skorokhod(u, f, required_box(OperatorKind::Skorokhod, u, f))?;
    let deriv = malliavin_d(u, v, required_box(OperatorKind::Derivative, u, v))?;
    let lhs = duality_pairing(&delta, v)?;
    let rhs = duality_pairing(f, &deriv)?;
    let mut metadata = variant.membership(u, f, v)?;
    metadata["boxes"] = json!({
        "delta": format!("{}", delta.bounds()),
        "derivative": format!("{}", deriv.bounds()),
    });
    Ok(DualityReport::evaluate(variant.id(), lhs, rhs, metadata))
}

/// Monte Carlo form of the same identity: sample estimates of
/// `E[(v, delta_u(f))]` and `E[(f, D_u(v))]` from a shared stream, with
/// a standard error on the per-sample difference.
pub fn mc_adjointness(
    u: &ChaosExpansion,
    f: &ChaosExpansion,
    v: &ChaosExpansion,
    n_samples: u64,
    seed: u64,
) -> Result<McReport, VerifyError> {
    let delta = skorokhod(u, f, required_box(OperatorKind::Skorokhod, u, f))?;
    let deriv = malliavin_d(u, v, required_box(OperatorKind::Derivative, u, v))?;
    let dims = delta
        .bounds()
        .k
        .max(deriv.bounds().k)
        .max(v.bounds().k)
        .max(f.bounds().k);

    let mut lhs_sum = CompensatedSum::new();
    let mut rhs_sum = CompensatedSum::new();
    let mut diff_sum = CompensatedSum::new();
    let mut diff_sq = CompensatedSum::new();
    for s in crate::hermite::sample(dims, n_samples, seed) {
        let v_val = v.evaluate(&s)?;
        let delta_val = delta.evaluate(&s)?;
        let f_val = f.evaluate(&s)?;
        let d_val = deriv.evaluate(&s)?;
        let lhs: f64 = v_val.iter().zip(&delta_val).map(|(&a, &b)| a * b).sum();
        let rhs: f64 = f_val.iter().zip(&d_val).map(|(&a, &b)| a * b).sum();
        lhs_sum.add(lhs);
        rhs_sum.add(rhs);
        let d = lhs - rhs;
        diff_sum.add(d);
        diff_sq.add(d * d);
    }
    let n = n_samples as f64;
    let lhs_mean = lhs_sum.value() / n;
    let rhs_mean = rhs_sum.value() / n;
    let diff = diff_sum.value() / n;
    let diff_var = (diff_sq.value() / n - diff * diff).max(0.0);
    let diff_se = (diff_var / n).sqrt();
    let pass = diff == 0.0 || diff.abs() <= 5.0 * diff_se;
    Ok(McReport {
        id: "mc-adjointness".into(),
        n_samples,
        seed,
        generator: GENERATOR_ID.into(),
        lhs_mean,
        rhs_mean,
        diff,
        diff_se,
        pass,
        metadata: json!({
            "dims": dims,
            "coefficient_pairing": duality_pairing(&delta, v)?,
        }),
    })
}
