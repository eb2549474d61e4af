//! Compensated floating-point accumulation.
//!
//! Birkhoff sums add up to ~5*10^7 terms of size O(Var f); a Neumaier
//! accumulator keeps the rounding error of the whole sum at a few ulps
//! instead of letting it grow linearly in the number of terms.

/// Neumaier variant of Kahan summation: like Kahan, but the compensation
/// also survives the case |term| > |running sum|.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    /// Fold another accumulator in, preserving both compensations.
    pub fn merge(&mut self, other: &NeumaierSum) {
        self.add(other.s);
        self.c += other.c;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancellation_that_plain_sum_loses() {
        let mut n = NeumaierSum::new();
        n.add(1.0);
        n.add(1e100);
        n.add(1.0);
        n.add(-1e100);
        assert_eq!(n.value(), 2.0);
    }

    #[test]
    fn merge_matches_sequential_accumulation() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 2654435761_u64) % 997) as f64 - 498.0).collect();
        let mut whole = NeumaierSum::new();
        for &x in &xs {
            whole.add(x);
        }
        let mut left = NeumaierSum::new();
        let mut right = NeumaierSum::new();
        for &x in &xs[..500] {
            left.add(x);
        }
        for &x in &xs[500..] {
            right.add(x);
        }
        left.merge(&right);
        assert!((left.value() - whole.value()).abs() < 1e-9);
    }
}
