//! Seeded random instances for the verifier batches.
//!
//! Coefficients are i.i.d. uniform on [-1, 1], scaled by the inverse of
//! the hypothesis weight and by 1/sqrt(box size) so every hypothesis
//! norm is O(1); the generator and seed travel into the reports.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::chaos::{ChaosExpansion, CoefShape, TruncationBox, WeightSystem};

/// Per-instance generator: instance `index` draws from stream `index`
/// of the master seed, so batches parallelize without overlap.
pub fn instance_rng(master_seed: u64, index: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Random expansion whose `weight`-norm is O(1): each coefficient of
/// index `a` is uniform on [-1, 1] divided by `weight(a) * sqrt(|box|)`.
pub fn hypothesis_scaled(
    shape: CoefShape,
    bounds: TruncationBox,
    weight: &WeightSystem,
    rng: &mut ChaCha12Rng,
) -> ChaosExpansion {
    let indices = bounds.enumerate();
    let scale_box = 1.0 / (indices.len() as f64).sqrt();
    let mut out = ChaosExpansion::new(shape, bounds).expect("valid shape");
    for a in indices {
        let w = weight.weight(&a).expect("weight defined on the box");
        let coef: Vec<f64> = (0..shape.len())
            .map(|_| rng.random_range(-1.0..=1.0) * scale_box / w)
            .collect();
        out.insert(a, coef).expect("inside box");
    }
    out
}

/// Uniform [-1, 1] coefficients with unit scaling.
pub fn unit_scaled(
    shape: CoefShape,
    bounds: TruncationBox,
    rng: &mut ChaCha12Rng,
) -> ChaosExpansion {
    hypothesis_scaled(shape, bounds, &WeightSystem::unit(), rng)
}

/// Mantissa width of the dyadic grid used by exact-identity tests.
pub const DYADIC_BITS: u32 = 20;

/// Random expansion with coefficients on the dyadic grid `m / 2^20`,
/// `|m| <= 2^20`. Integer-weighted sums of such values incur no rounding,
/// so identities like the number-operator form can be asserted bitwise.
pub fn dyadic_scaled(
    shape: CoefShape,
    bounds: TruncationBox,
    rng: &mut ChaCha12Rng,
) -> ChaosExpansion {
    let denom = f64::from(1u32 << DYADIC_BITS);
    let lim = 1i64 << DYADIC_BITS;
    let mut out = ChaosExpansion::new(shape, bounds).expect("valid shape");
    for a in bounds.enumerate() {
        let coef: Vec<f64> = (0..shape.len())
            .map(|_| rng.random_range(-lim..=lim) as f64 / denom)
            .collect();
        out.insert(a, coef).expect("inside box");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_norm_is_order_one() {
        let w = WeightSystem::kondratiev(1.0, 0.5).unwrap();
        let mut rng = instance_rng(7, 0);
        let e = hypothesis_scaled(
            CoefShape::Scalar { dx: 3 },
            TruncationBox::new(3, 4),
            &w,
            &mut rng,
        );
        let norm = e.weighted_norm(&w).unwrap();
        assert!(norm > 0.05 && norm < 3.0, "norm {norm}");
    }

    #[test]
    fn streams_are_reproducible_and_disjoint() {
        let a = unit_scaled(
            CoefShape::Scalar { dx: 1 },
            TruncationBox::new(2, 2),
            &mut instance_rng(11, 4),
        );
        let b = unit_scaled(
            CoefShape::Scalar { dx: 1 },
            TruncationBox::new(2, 2),
            &mut instance_rng(11, 4),
        );
        let c = unit_scaled(
            CoefShape::Scalar { dx: 1 },
            TruncationBox::new(2, 2),
            &mut instance_rng(11, 5),
        );
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn dyadic_values_have_short_mantissas() {
        let e = dyadic_scaled(
            CoefShape::Scalar { dx: 2 },
            TruncationBox::new(2, 3),
            &mut instance_rng(3, 0),
        );
        for (_, coef) in e.terms() {
            for &x in coef {
                let scaled = x * f64::from(1u32 << DYADIC_BITS);
                assert_eq!(scaled, scaled.round(), "{x} is not on the dyadic grid");
            }
        }
    }
}
