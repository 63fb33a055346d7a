use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_GENERATORS: usize = 8;

/// An element of the exterior algebra over `k` odd generators, stored as a
/// dense table indexed by generator bitmask (bit `i` set ⇔ generator `i`
/// present, factors in ascending order).
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannElement {
    k: usize,
    coeffs: Vec<Complex64>,
}

/// Sign of reordering `e_a · e_b` into ascending order: one swap for every
/// pair `i ∈ a`, `j ∈ b` with `i > j`.
fn reorder_negates(a: usize, b: usize) -> bool {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    swaps % 2 == 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grade {
    Even,
    Odd,
}

impl GrassmannElement {
    pub fn zero(k: usize) -> Self {
        assert!(k <= MAX_GENERATORS, "at most {MAX_GENERATORS} generators");
        Self {
            k,
            coeffs: vec![Complex64::new(0.0, 0.0); 1 << k],
        }
    }

    pub fn scalar(k: usize, c: Complex64) -> Self {
        let mut e = Self::zero(k);
        e.coeffs[0] = c;
        e
    }

    pub fn one(k: usize) -> Self {
        Self::scalar(k, Complex64::new(1.0, 0.0))
    }

    /// The generator with 0-based index `i`.
    pub fn generator(k: usize, i: usize) -> Self {
        assert!(i < k, "generator {i} out of range for k = {k}");
        let mut e = Self::zero(k);
        e.coeffs[1 << i] = Complex64::new(1.0, 0.0);
        e
    }

    pub fn from_coeffs(k: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if k > MAX_GENERATORS {
            return Err(Error::Capacity {
                what: "Grassmann generators",
                requested: k as u128,
                limit: MAX_GENERATORS as u128,
            });
        }
        if coeffs.len() != 1 << k {
            return Err(Error::Shape(format!(
                "expected {} coefficients, got {}",
                1 << k,
                coeffs.len()
            )));
        }
        Ok(Self { k, coeffs })
    }

    pub fn generators(&self) -> usize {
        self.k
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: usize) -> Complex64 {
        self.coeffs[mask]
    }

    pub fn set_coeff(&mut self, mask: usize, c: Complex64) {
        self.coeffs[mask] = c;
    }

    /// The coefficient of the empty monomial.
    pub fn numerical_part(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn nilpotent_part(&self) -> Self {
        let mut e = self.clone();
        e.coeffs[0] = Complex64::new(0.0, 0.0);
        e
    }

    /// `Some` grade when every nonzero coefficient has the same parity;
    /// zero counts as both and reports `Even`.
    pub fn grade(&self) -> Option<Grade> {
        let mut even = false;
        let mut odd = false;
        for (m, c) in self.coeffs.iter().enumerate() {
            if c.norm_sqr() != 0.0 {
                if m.count_ones() % 2 == 0 {
                    even = true;
                } else {
                    odd = true;
                }
            }
        }
        match (even, odd) {
            (_, false) => Some(Grade::Even),
            (false, true) => Some(Grade::Odd),
            (true, true) => None,
        }
    }

    pub fn is_even(&self) -> bool {
        self.grade() == Some(Grade::Even)
    }

    /// Odd or zero.
    pub fn is_odd(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(m, c)| m.count_ones() % 2 == 1 || c.norm_sqr() == 0.0)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            k: self.k,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.clone() - other.clone()).max_abs()
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.k != other.k {
            return Err(Error::GeneratorMismatch(self.k, other.k));
        }
        Ok(())
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.k);
        for (a, ca) in self.coeffs.iter().enumerate() {
            if ca.norm_sqr() == 0.0 {
                continue;
            }
            for (b, cb) in other.coeffs.iter().enumerate() {
                if a & b != 0 {
                    continue;
                }
                let v = ca * cb;
                if reorder_negates(a, b) {
                    out.coeffs[a | b] -= v;
                } else {
                    out.coeffs[a | b] += v;
                }
            }
        }
        out
    }

    /// Inverse, for a nonzero numerical part: `x₀⁻¹ Σ (−n/x₀)^m`.
    pub fn inverse(&self) -> Result<Self> {
        let x0 = self.numerical_part();
        if x0.norm_sqr() == 0.0 {
            return Err(Error::SingularBlock("element with zero numerical part"));
        }
        let t = self.nilpotent_part().scale(-1.0 / x0);
        let mut term = Self::one(self.k);
        let mut acc = Self::one(self.k);
        for _ in 0..self.k {
            term = term.mul_unchecked(&t);
            acc = acc + term.clone();
        }
        Ok(acc.scale(1.0 / x0))
    }

    /// `exp` of an element with zero numerical part, times `e^{x₀}` otherwise.
    pub fn exp(&self) -> Self {
        let n = self.nilpotent_part();
        let mut term = Self::one(self.k);
        let mut acc = Self::one(self.k);
        for m in 1..=self.k {
            term = term.mul_unchecked(&n).scale(Complex64::new(1.0 / m as f64, 0.0));
            acc = acc + term.clone();
        }
        acc.scale(self.numerical_part().exp())
    }
}

/// Graded product; fails when the generator counts differ.
pub fn gmul(a: &GrassmannElement, b: &GrassmannElement) -> Result<GrassmannElement> {
    a.check(b)?;
    Ok(a.mul_unchecked(b))
}

impl Add for GrassmannElement {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.k, rhs.k, "generator count mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        self
    }
}

impl Sub for GrassmannElement {
    type Output = Self;

    fn sub(mut self, rhs: Self) -> Self {
        assert_eq!(self.k, rhs.k, "generator count mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
        self
    }
}

impl Neg for GrassmannElement {
    type Output = Self;

    fn neg(self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &GrassmannElement {
    type Output = GrassmannElement;

    fn mul(self, rhs: Self) -> GrassmannElement {
        assert_eq!(self.k, rhs.k, "generator count mismatch");
        self.mul_unchecked(rhs)
    }
}
