//! The arithmetic the closed-form evaluators need, abstracted so the same
//! code runs on plain complex numbers, double-double complex numbers and
//! Taylor jets.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

pub trait Scalar:
    Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    /// A constant with the same shape as `self` (jet degree, etc.).
    fn constant_like(&self, c: Complex64) -> Self;

    /// Magnitude of the value part, used for singularity and conditioning checks.
    fn magnitude(&self) -> f64;

    fn powu(&self, n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = self.constant_like(Complex64::new(1.0, 0.0));
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    fn one_like(&self) -> Self {
        self.constant_like(Complex64::new(1.0, 0.0))
    }
}

impl Scalar for Complex64 {
    fn constant_like(&self, c: Complex64) -> Self {
        c
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn powu(&self, n: u32) -> Self {
        self.powu(n)
    }
}
