//! Truncated univariate Taylor series ("jets").
//!
//! A [`Jet`] of degree `L` holds `c_0 … c_L` with
//! `f(t) = Σ c_m t^m + O(t^{L+1})`. Arithmetic uses the standard truncated
//! recurrences, so the `n`-th derivative at the base point is `n! · c_n`
//! exactly up to roundoff.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_DEGREE: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    coeffs: Vec<Complex64>,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl Jet {
    pub fn from_coeffs(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Self { coeffs }
    }

    pub fn constant(degree: usize, c: Complex64) -> Self {
        let mut coeffs = vec![zero(); degree + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    /// The identity jet `x0 + t`.
    pub fn variable(degree: usize, x0: Complex64) -> Self {
        let mut j = Self::constant(degree, x0);
        if degree > 0 {
            j.coeffs[1] = Complex64::new(1.0, 0.0);
        }
        j
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// `n! · c_n`, or zero beyond the truncation degree.
    pub fn derivative(&self, n: usize) -> Complex64 {
        match self.coeffs.get(n) {
            Some(c) => c * factorial(n),
            None => zero(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn check_degree(&self, other: &Self) {
        assert_eq!(self.degree(), other.degree(), "jet degree mismatch in arithmetic");
    }

    pub fn try_inv(&self) -> Result<Self> {
        if self.coeffs[0].norm_sqr() == 0.0 {
            return Err(Error::DivisionByZeroJet);
        }
        Ok(self.inv_unchecked())
    }

    fn inv_unchecked(&self) -> Self {
        let a = &self.coeffs;
        let inv0 = Complex64::new(1.0, 0.0) / a[0];
        let mut b = vec![zero(); a.len()];
        b[0] = inv0;
        for m in 1..a.len() {
            let s: Complex64 = (1..=m).map(|k| a[k] * b[m - k]).sum();
            b[m] = -s * inv0;
        }
        Self { coeffs: b }
    }

    pub fn exp(&self) -> Self {
        let a = &self.coeffs;
        let mut b = vec![zero(); a.len()];
        b[0] = a[0].exp();
        for m in 1..a.len() {
            let s: Complex64 = (1..=m).map(|k| a[k] * b[m - k] * k as f64).sum();
            b[m] = s / m as f64;
        }
        Self { coeffs: b }
    }

    /// Principal square root; the cut is the closed negative real axis.
    pub fn sqrt(&self) -> Result<Self> {
        let a = &self.coeffs;
        if a[0].im == 0.0 && a[0].re <= 0.0 {
            return Err(Error::Branch(a[0]));
        }
        let mut b = vec![zero(); a.len()];
        b[0] = a[0].sqrt();
        let two_b0 = b[0] * 2.0;
        for m in 1..a.len() {
            let s: Complex64 = (1..m).map(|k| b[k] * b[m - k]).sum();
            b[m] = (a[m] - s) / two_b0;
        }
        Ok(Self { coeffs: b })
    }

    /// Integer power by repeated squaring.
    pub fn pow_n(&self, n: u32) -> Self {
        Scalar::powu(self, n)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl Add for Jet {
    type Output = Jet;

    fn add(self, rhs: Jet) -> Jet {
        self.check_degree(&rhs);
        Jet {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for Jet {
    type Output = Jet;

    fn sub(self, rhs: Jet) -> Jet {
        self.check_degree(&rhs);
        Jet {
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for Jet {
    type Output = Jet;

    fn neg(self) -> Jet {
        Jet {
            coeffs: self.coeffs.iter().map(|a| -a).collect(),
        }
    }
}

impl Mul for Jet {
    type Output = Jet;

    // Cauchy product, truncated
    fn mul(self, rhs: Jet) -> Jet {
        self.check_degree(&rhs);
        let a = &self.coeffs;
        let b = &rhs.coeffs;
        let coeffs = (0..a.len()).map(|m| (0..=m).map(|k| a[k] * b[m - k]).sum()).collect();
        Jet { coeffs }
    }
}

impl Div for Jet {
    type Output = Jet;

    /// A zero constant term in the divisor yields non-finite coefficients;
    /// use [`Jet::try_inv`] to get an error instead.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        let inv = rhs.inv_unchecked();
        self * inv
    }
}

impl Scalar for Jet {
    fn constant_like(&self, c: Complex64) -> Self {
        Jet::constant(self.degree(), c)
    }

    fn magnitude(&self) -> f64 {
        self.coeffs[0].norm()
    }
}

/// Operation selector for [`jet_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Mul,
    Inv,
    Exp,
    Sqrt,
    Pow(u32),
}

/// Applies a single jet operation; binary operations require `b`.
pub fn jet_arith(op: JetOp, a: &Jet, b: Option<&Jet>) -> Result<Jet> {
    let need_b = || {
        b.cloned()
            .ok_or_else(|| Error::Value("binary jet operation needs two operands".into()))
    };
    if let Some(b) = b {
        if b.degree() != a.degree() {
            return Err(Error::Shape(format!(
                "jet degrees differ: {} vs {}",
                a.degree(),
                b.degree()
            )));
        }
    }
    match op {
        JetOp::Add => Ok(a.clone() + need_b()?),
        JetOp::Mul => Ok(a.clone() * need_b()?),
        JetOp::Inv => a.try_inv(),
        JetOp::Exp => Ok(a.exp()),
        JetOp::Sqrt => a.sqrt(),
        JetOp::Pow(n) => Ok(a.pow_n(n)),
    }
}

/// `∂^n f / ∂v_var^n` at `point`, where `f` receives one jet per variable
/// and only variable `var` carries the expansion parameter.
pub fn nth_derivative<F>(f: F, point: &[Complex64], var: usize, n: usize) -> Result<Complex64>
where
    F: Fn(&[Jet]) -> Result<Jet>,
{
    if var >= point.len() {
        return Err(Error::Shape(format!(
            "variable {} out of range for {} variables",
            var + 1,
            point.len()
        )));
    }
    let degree = n.max(1);
    let args = seed_jets(point, var, degree);
    Ok(f(&args)?.derivative(n))
}

/// Jets for each coordinate of `point`, with `var` seeded as `x + t`.
pub fn seed_jets(point: &[Complex64], var: usize, degree: usize) -> Vec<Jet> {
    point
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if i == var {
                Jet::variable(degree, x)
            } else {
                Jet::constant(degree, x)
            }
        })
        .collect()
}
