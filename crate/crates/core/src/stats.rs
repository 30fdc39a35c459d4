//! Running sample moments of complex values.

use crate::scalar::{cr, czero, Real, C};

/// Accumulates Σz and the per-component sums of squares, so means and
/// standard errors come out without a second pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexMoments<T: Real> {
    pub count: usize,
    sum: C<T>,
    sum_sq: C<T>,
}

impl<T: Real> Default for ComplexMoments<T> {
    fn default() -> Self {
        Self { count: 0, sum: czero(), sum_sq: czero() }
    }
}

impl<T: Real> ComplexMoments<T> {
    #[inline]
    pub fn push(&mut self, z: C<T>) {
        self.count += 1;
        self.sum += z;
        self.sum_sq += C::new(z.re * z.re, z.im * z.im);
    }

    /// Combines two disjoint samples.
    pub fn merge(&mut self, other: &Self) {
        self.count += other.count;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> C<T> {
        if self.count == 0 {
            return czero();
        }
        self.sum / cr(T::from_usize_lossy(self.count))
    }

    /// Standard error of the mean, real and imaginary parts separately.
    pub fn std_error(&self) -> C<T> {
        if self.count < 2 {
            return czero();
        }
        let n = T::from_usize_lossy(self.count);
        let m = self.mean();
        let var = |s: T, mu: T| ((s / n - mu * mu) * n / (n - T::one())).max(T::zero());
        C::new(
            (var(self.sum_sq.re, m.re) / n).sqrt(),
            (var(self.sum_sq.im, m.im) / n).sqrt(),
        )
    }

    /// Whether `expected` lies within `k` standard errors in both components.
    /// A component with zero spread must match to round-off.
    pub fn consistent_with(&self, expected: C<T>, k: T) -> bool {
        let m = self.mean();
        let se = self.std_error();
        let ok = |d: T, s: T| d.abs() <= k * s + T::lit(1e-12) * (T::one() + expected.norm());
        ok(m.re - expected.re, se.re) && ok(m.im - expected.im, se.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_error_of_known_sample() {
        let mut m = ComplexMoments::<f64>::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(C::new(x, -x));
        }
        assert_eq!(m.mean(), C::new(2.5, -2.5));
        let se = (5.0f64 / 3.0 / 4.0).sqrt();
        assert!((m.std_error().re - se).abs() < 1e-14);
        assert!(m.consistent_with(C::new(2.5 + 2.0 * se, -2.5), 3.0));
        assert!(!m.consistent_with(C::new(2.5 + 4.0 * se, -2.5), 3.0));
    }

    #[test]
    fn merge_equals_sequential() {
        let mut a = ComplexMoments::<f64>::default();
        let mut b = ComplexMoments::<f64>::default();
        let mut all = ComplexMoments::<f64>::default();
        for i in 0..10 {
            let z = C::new(i as f64, (i * i) as f64);
            if i < 4 { a.push(z) } else { b.push(z) }
            all.push(z);
        }
        a.merge(&b);
        assert_eq!(a, all);
    }
}
