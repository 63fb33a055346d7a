//! Neumaier-compensated summation of complex terms.

use num_complex::Complex64;

#[inline]
fn neumaier_add(sum: &mut f64, c: &mut f64, v: f64) {
    let t = *sum + v;
    if sum.abs() >= v.abs() {
        *c += (*sum - t) + v;
    } else {
        *c += (v - t) + *sum;
    }
    *sum = t;
}

/// Running compensated sum that also tracks the largest term seen, so the
/// cancellation ratio `max|term| / |sum|` can be reported.
#[derive(Debug, Clone, Default)]
pub struct CompensatedSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
    max_term: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, v: Complex64) {
        neumaier_add(&mut self.re, &mut self.re_c, v.re);
        neumaier_add(&mut self.im, &mut self.im_c, v.im);
        self.max_term = self.max_term.max(v.norm());
    }

    pub fn total(&self) -> Complex64 {
        Complex64::new(self.re + self.re_c, self.im + self.im_c)
    }

    pub fn max_term(&self) -> f64 {
        self.max_term
    }

    /// `max|term| / |sum|`, clamped below at 1; infinite when the sum
    /// cancels to zero with nonzero terms.
    pub fn condition(&self) -> f64 {
        let s = self.total().norm();
        if self.max_term == 0.0 {
            1.0
        } else if s == 0.0 {
            f64::INFINITY
        } else {
            (self.max_term / s).max(1.0)
        }
    }
}

impl Extend<Complex64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = Complex64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<Complex64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_small_terms() {
        let terms = [1e16, 1.0, -1e16, 1.0].map(|v| Complex64::new(v, -v));
        let s: CompensatedSum = terms.into_iter().collect();
        assert_eq!(s.total(), Complex64::new(2.0, -2.0));
        let naive: Complex64 = terms.iter().sum();
        assert_ne!(naive, s.total());
        assert!((s.condition() / 5e15 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn condition_edge_cases() {
        assert_eq!(CompensatedSum::new().condition(), 1.0);
        let s: CompensatedSum = [1.0, -1.0].map(|v| Complex64::new(v, 0.0)).into_iter().collect();
        assert!(s.condition().is_infinite());
    }
}
