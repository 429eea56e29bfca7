//! Compensated (error-free-transform) accumulation.
//!
//! Norms, pairings, and operator coefficients all accumulate in a fixed
//! canonical index order through [`CompensatedSum`], so results are
//! deterministic and the bound verifiers can compare nearly equal
//! quantities without drowning in accumulated rounding.

/// Kahan-Babuska-Neumaier accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated sum of an iterator, in iteration order.
pub fn sum_compensated<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// A vector of compensated accumulators, one per coefficient component.
#[derive(Debug, Clone)]
pub struct CompensatedVec {
    slots: Vec<CompensatedSum>,
}

impl CompensatedVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            slots: vec![CompensatedSum::new(); len],
        }
    }

    #[inline]
    pub fn add(&mut self, index: usize, value: f64) {
        self.slots[index].add(value);
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.slots.iter().map(CompensatedSum::value).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancellation() {
        // Naive summation loses the small term entirely.
        let values = [1e16, 1.0, -1e16];
        assert_eq!(sum_compensated(values.iter().copied()), 1.0);
    }

    #[test]
    fn matches_exact_rational_sum() {
        let values: Vec<f64> = (1..=1000).map(|k| 1.0 / k as f64).collect();
        let compensated = sum_compensated(values.iter().copied());
        // Reference from summing smallest-first, which is the accurate order.
        let reference = sum_compensated(values.iter().rev().copied());
        assert!((compensated - reference).abs() < 1e-13);
    }
}
