//! Probabilists' Hermite polynomials, basis evaluation, and the seeded
//! Gaussian sampler behind the Monte Carlo checks.
//!
//! Everything here uses the probabilists' normalization
//! `H_0 = 1, H_1 = t, H_{n+1}(t) = t H_n(t) - n H_{n-1}(t)`,
//! orthogonal under the standard Gaussian weight with `E H_n^2 = n!`.
//! This is fixed by the Rodrigues form `(-1)^n e^{t^2/2} d^n/dt^n e^{-t^2/2}`
//! and is *not* the physicists' convention; mixing the two is the classic
//! off-by-sqrt(2) error.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::multiindex::{big_to_f64, MultiIndex, MultiIndexError};

/// Name and version of the pinned random generator, echoed into every
/// Monte Carlo report so runs are bit-reproducible.
pub const GENERATOR_ID: &str = "ChaCha12Rng (rand_chacha 0.9, seed_from_u64, per-worker streams)";

/// Probabilists' Hermite polynomial `H_n(t)` by the three-term recursion.
///
/// Iterative, O(n) per call, numerically stable at the moderate degrees
/// used here; no coefficient tables.
pub fn hermite_h(n: u32, t: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0f64; // H_0
    let mut curr = t; // H_1
    for m in 1..n {
        let next = t * curr - f64::from(m) * prev;
        prev = curr;
        curr = next;
    }
    curr
}

/// One draw of the Gaussian coordinates `(x_1, .., x_K)`, with the seed
/// recorded for reproducibility.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSample {
    pub coords: Vec<f64>,
    pub rng_seed: u64,
}

impl GaussianSample {
    pub fn from_coords(coords: Vec<f64>) -> Self {
        Self {
            coords,
            rng_seed: 0,
        }
    }
}

/// Normalized basis element `xi_a = prod_k H_{a_k}(x_k) / sqrt(a!)`.
///
/// Absent entries contribute `H_0 = 1`; the zero index evaluates to 1.
pub fn xi_alpha(a: &MultiIndex, sample: &GaussianSample) -> Result<f64, MultiIndexError> {
    let unnormalized = hep_alpha(a, sample)?;
    Ok(unnormalized / big_to_f64(&a.factorial()).sqrt())
}

/// Unnormalized basis element `prod_k H_{a_k}(x_k) = sqrt(a!) * xi_a`.
pub fn hep_alpha(a: &MultiIndex, sample: &GaussianSample) -> Result<f64, MultiIndexError> {
    let mut acc = 1.0f64;
    for &(pos, val) in a.entries() {
        let Some(&coord) = sample.coords.get(pos as usize - 1) else {
            return Err(MultiIndexError::UnsupportedIndex {
                position: pos,
                max_dim: sample.coords.len() as u32,
            });
        };
        acc *= hermite_h(val, coord);
    }
    Ok(acc)
}

/// Reproducible stream of i.i.d. standard Gaussian samples.
///
/// Parameterized by `(seed, stream)`: parallel workers pass distinct
/// stream indices and draw non-overlapping substreams of the same seed.
pub struct SampleStream {
    rng: ChaCha12Rng,
    dims: u32,
    remaining: u64,
    seed: u64,
}

impl SampleStream {
    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl Iterator for SampleStream {
    type Item = GaussianSample;

    fn next(&mut self) -> Option<GaussianSample> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let coords = (0..self.dims)
            .map(|_| StandardNormal.sample(&mut self.rng))
            .collect();
        Some(GaussianSample {
            coords,
            rng_seed: self.seed,
        })
    }
}

/// `n_samples` standard Gaussian draws in dimension `dims` from `seed`.
pub fn sample(dims: u32, n_samples: u64, seed: u64) -> SampleStream {
    sample_stream(dims, n_samples, seed, 0)
}

/// Substream variant of [`sample`] for parallel workers.
pub fn sample_stream(dims: u32, n_samples: u64, seed: u64, stream: u64) -> SampleStream {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    SampleStream {
        rng,
        dims,
        remaining: n_samples,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sum::CompensatedSum;

    #[test]
    fn hermite_small_values() {
        assert_eq!(hermite_h(0, 3.7), 1.0);
        assert_eq!(hermite_h(2, 1.0), 0.0); // t^2 - 1 at 1
        assert_eq!(hermite_h(3, 2.0), 2.0); // t^3 - 3t at 2
        assert_eq!(hermite_h(1, -0.5), -0.5);
    }

    /// Hand-expanded coefficient forms of H_0..H_6, highest power first.
    const EXPLICIT: [&[i64]; 7] = [
        &[1],
        &[1, 0],
        &[1, 0, -1],
        &[1, 0, -3, 0],
        &[1, 0, -6, 0, 3],
        &[1, 0, -10, 0, 15, 0],
        &[1, 0, -15, 0, 45, 0, -15],
    ];

    /// Exact-rational recursion vs. the explicit polynomials at rational
    /// points: both sides evaluated in `Ratio<BigInt>`, equality exact.
    #[test]
    fn recursion_matches_explicit_polynomials_exactly() {
        use num_bigint::BigInt;
        use num_rational::Ratio;

        type Q = Ratio<BigInt>;
        let points = [
            Q::new(BigInt::from(3), BigInt::from(2)),
            Q::new(BigInt::from(-7), BigInt::from(3)),
            Q::new(BigInt::from(0), BigInt::from(1)),
            Q::new(BigInt::from(11), BigInt::from(5)),
        ];
        for t in points {
            let mut prev = Q::from_integer(BigInt::from(1));
            let mut curr = t.clone();
            for n in 0..=6u32 {
                let recursion = match n {
                    0 => Q::from_integer(BigInt::from(1)),
                    1 => t.clone(),
                    _ => {
                        let next = &t * &curr - Q::from_integer(BigInt::from(n - 1)) * &prev;
                        prev = curr.clone();
                        curr = next.clone();
                        next
                    }
                };
                let horner = EXPLICIT[n as usize].iter().fold(
                    Q::from_integer(BigInt::from(0)),
                    |acc, &c| acc * t.clone() + Q::from_integer(BigInt::from(c)),
                );
                assert_eq!(recursion, horner, "H_{n} mismatch at t = {t}");
                // The f64 recursion agrees with the exact value.
                let exact = horner.numer().to_string().parse::<f64>().unwrap()
                    / horner.denom().to_string().parse::<f64>().unwrap();
                let float = hermite_h(n, t.numer().to_string().parse::<f64>().unwrap()
                    / t.denom().to_string().parse::<f64>().unwrap());
                assert!((float - exact).abs() <= 1e-12 * exact.abs().max(1.0));
            }
        }
    }

    #[test]
    fn xi_alpha_values() {
        let s = GaussianSample::from_coords(vec![1.0, 2.0]);
        assert_eq!(xi_alpha(&MultiIndex::zero(), &s).unwrap(), 1.0);
        assert_eq!(xi_alpha(&MultiIndex::single(1, 2), &s).unwrap(), 0.0);
        let a = MultiIndex::epsilon(1).add(&MultiIndex::epsilon(2));
        assert_eq!(xi_alpha(&a, &s).unwrap(), 2.0);
        assert!(xi_alpha(&MultiIndex::epsilon(3), &s).is_err());
    }

    #[test]
    fn hep_alpha_values() {
        let t = 0.37;
        let s = GaussianSample::from_coords(vec![t, 2.0]);
        let a = MultiIndex::single(1, 2);
        assert_eq!(hep_alpha(&a, &s).unwrap(), hermite_h(2, t));
        assert_eq!(hep_alpha(&MultiIndex::zero(), &s).unwrap(), 1.0);
        let ab = MultiIndex::epsilon(1).add(&MultiIndex::epsilon(2));
        assert_eq!(hep_alpha(&ab, &s).unwrap(), t * 2.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let a: Vec<_> = sample(2, 3, 42).collect();
        let b: Vec<_> = sample(2, 3, 42).collect();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert_eq!(a[0].coords.len(), 2);
        // Distinct streams of the same seed are distinct.
        let c: Vec<_> = sample_stream(2, 3, 42, 1).collect();
        assert_ne!(a, c);
    }

    #[test]
    fn sample_moments_within_clt_bounds() {
        let n = 1_000_000u64;
        let mut mean = CompensatedSum::new();
        let mut second = CompensatedSum::new();
        for s in sample(1, n, 2024) {
            mean.add(s.coords[0]);
            second.add(s.coords[0] * s.coords[0]);
        }
        let nf = n as f64;
        let mean = mean.value() / nf;
        let variance = second.value() / nf - mean * mean;
        assert!(mean.abs() < 4.0 / nf.sqrt(), "mean {mean}");
        assert!((variance - 1.0).abs() < 0.01, "variance {variance}");
    }
}
