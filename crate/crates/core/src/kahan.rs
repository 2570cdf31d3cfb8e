//! Compensated (Kahan) summation.
//!
//! Every accumulation of probability weights in this crate goes through
//! [`KahanSum`]: the quantities of interest are sums of positive terms, so
//! compensation keeps the relative error near machine precision even when
//! the sum spans many orders of magnitude.

/// Kahan accumulator for `f64` terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Add one term.
    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    /// Current value of the sum.
    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }

    /// Sum an iterator of terms.
    pub fn sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc.value()
    }
}
