//! Double-double ("twice f64") real and complex arithmetic, about 32
//! significant decimal digits. Used to re-evaluate badly cancelling sums.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DdReal {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DdReal {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    pub fn from_f64(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl Add for DdReal {
    type Output = Self;

    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Self { hi, lo }
    }
}

impl Neg for DdReal {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DdReal {
    type Output = Self;

    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DdReal {
    type Output = Self;

    fn mul(self, b: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }
}

impl Div for DdReal {
    type Output = Self;

    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b * DdReal::from_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * DdReal::from_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + DdReal::from_f64(q3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DdComplex {
    pub re: DdReal,
    pub im: DdReal,
}

impl DdComplex {
    pub fn from_c64(c: Complex64) -> Self {
        Self {
            re: DdReal::from_f64(c.re),
            im: DdReal::from_f64(c.im),
        }
    }

    pub fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for DdComplex {
    type Output = Self;

    fn add(self, b: Self) -> Self {
        Self {
            re: self.re + b.re,
            im: self.im + b.im,
        }
    }
}

impl Sub for DdComplex {
    type Output = Self;

    fn sub(self, b: Self) -> Self {
        Self {
            re: self.re - b.re,
            im: self.im - b.im,
        }
    }
}

impl Neg for DdComplex {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Mul for DdComplex {
    type Output = Self;

    fn mul(self, b: Self) -> Self {
        Self {
            re: self.re * b.re - self.im * b.im,
            im: self.re * b.im + self.im * b.re,
        }
    }
}

impl Div for DdComplex {
    type Output = Self;

    fn div(self, b: Self) -> Self {
        // scale by the larger component to keep |b|² in range
        let s = DdReal::from_f64(b.re.hi.abs().max(b.im.hi.abs()));
        let br = b.re / s;
        let bi = b.im / s;
        let den = br * br + bi * bi;
        let re = (self.re * br + self.im * bi) / den / s;
        let im = (self.im * br - self.re * bi) / den / s;
        Self { re, im }
    }
}

impl Scalar for DdComplex {
    fn constant_like(&self, c: Complex64) -> Self {
        Self::from_c64(c)
    }

    fn magnitude(&self) -> f64 {
        self.re.hi.hypot(self.im.hi)
    }
}
