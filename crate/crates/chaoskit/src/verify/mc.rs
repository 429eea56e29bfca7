//! Monte Carlo oracle: sampling checks of basis orthonormality and of
//! the norm identity `E|v|^2 = sum_a |v_a|^2`.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::chaos::{ChaosExpansion, TruncationBox};
use crate::hermite::{sample, xi_alpha, GENERATOR_ID};
use crate::sum::CompensatedSum;
use crate::verify::{McReport, VerifyError};

/// Worst standardized deviation over all basis pairs in a box.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrthonormalityReport {
    pub bounds: TruncationBox,
    pub n_samples: u64,
    pub seed: u64,
    pub generator: String,
    /// max over pairs of |mean - target| / se, target 1 on the diagonal
    /// and 0 off it.
    pub max_abs_z: f64,
    pub worst_pair: (String, String),
    pub pass: bool,
}

/// Estimates `E[xi_a xi_b]` for every pair in the box and checks the
/// identity matrix within 5 standard errors.
pub fn mc_orthonormality(bounds: TruncationBox, n_samples: u64, seed: u64) -> OrthonormalityReport {
    let indices = bounds.enumerate();
    let m = indices.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| (i..m).map(move |j| (i, j)))
        .collect();
    let mut sums = vec![CompensatedSum::new(); pairs.len()];
    let mut sq_sums = vec![CompensatedSum::new(); pairs.len()];
    let mut values = vec![0.0f64; m];
    for s in sample(bounds.k, n_samples, seed) {
        for (slot, a) in values.iter_mut().zip(&indices) {
            *slot = xi_alpha(a, &s).expect("sample spans the box");
        }
        for (p, &(i, j)) in pairs.iter().enumerate() {
            let prod = values[i] * values[j];
            sums[p].add(prod);
            sq_sums[p].add(prod * prod);
        }
    }
    let n = n_samples as f64;
    let mut max_abs_z = 0.0f64;
    let mut worst = (0usize, 0usize);
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let mean = sums[p].value() / n;
        let var = (sq_sums[p].value() / n - mean * mean).max(0.0);
        let se = (var / n).sqrt();
        let target = if i == j { 1.0 } else { 0.0 };
        // xi_(0) pairs itself with zero variance; exact match required.
        let z = if se == 0.0 {
            if mean == target {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (mean - target).abs() / se
        };
        if z > max_abs_z {
            max_abs_z = z;
            worst = (i, j);
        }
    }
    OrthonormalityReport {
        bounds,
        n_samples,
        seed,
        generator: GENERATOR_ID.into(),
        max_abs_z,
        worst_pair: (indices[worst.0].to_string(), indices[worst.1].to_string()),
        pass: max_abs_z <= 5.0,
    }
}

/// Estimates `E|v|^2` by sampling and compares with the coefficient sum
/// `sum_a |v_a|^2` within 5 standard errors.
pub fn mc_parseval(
    v: &ChaosExpansion,
    n_samples: u64,
    seed: u64,
) -> Result<McReport, VerifyError> {
    let exact = v.norm_squared();
    let mut mean_acc = CompensatedSum::new();
    let mut sq_acc = CompensatedSum::new();
    for s in sample(v.bounds().k, n_samples, seed) {
        let val = v.evaluate(&s)?;
        let norm_sq: f64 = val.iter().map(|&x| x * x).sum();
        mean_acc.add(norm_sq);
        sq_acc.add(norm_sq * norm_sq);
    }
    let n = n_samples as f64;
    let mean = mean_acc.value() / n;
    let var = (sq_acc.value() / n - mean * mean).max(0.0);
    let se = (var / n).sqrt();
    let diff = mean - exact;
    Ok(McReport {
        id: "mc-parseval".into(),
        n_samples,
        seed,
        generator: GENERATOR_ID.into(),
        lhs_mean: mean,
        rhs_mean: exact,
        diff,
        diff_se: se,
        pass: diff == 0.0 || diff.abs() <= 5.0 * se,
        metadata: json!({ "box": format!("{}", v.bounds()), "terms": v.num_terms() }),
    })
}
