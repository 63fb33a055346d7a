//! Random supermatrices for property checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngExt};

use super::element::GrassmannElement;
use super::supermatrix::{GMatrix, Parity, Supermatrix};

/// Draw integer coefficients in `[-3, 3]` (exact arithmetic) instead of
/// complex floats in the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmallInts(pub bool);

fn coeff<R: Rng + ?Sized>(rng: &mut R, ints: SmallInts) -> Complex64 {
    if ints.0 {
        Complex64::new(rng.random_range(-3i32..=3) as f64, rng.random_range(-3i32..=3) as f64)
    } else {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }
}

pub fn random_element<R: Rng + ?Sized>(k: usize, odd: bool, rng: &mut R, ints: SmallInts) -> GrassmannElement {
    let mut e = GrassmannElement::zero(k);
    for m in 0..1usize << k {
        if (m.count_ones() % 2 == 1) == odd {
            e.set_coeff(m, coeff(rng, ints));
        }
    }
    e
}

fn block<R: Rng + ?Sized>(rows: usize, cols: usize, k: usize, odd: bool, rng: &mut R, ints: SmallInts) -> GMatrix {
    let mut m = GMatrix::zeros(rows, cols, k);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = random_element(k, odd, rng, ints);
        }
    }
    m
}

/// A homogeneous supermatrix with random entries of the right grades.
pub fn random_supermatrix<R: Rng + ?Sized>(
    k: usize,
    p1: usize,
    p0: usize,
    parity: Parity,
    rng: &mut R,
    ints: SmallInts,
) -> Supermatrix {
    let diag_odd = parity == Parity::Odd;
    let a = block(p1, p1, k, diag_odd, rng, ints);
    let b = block(p1, p0, k, !diag_odd, rng, ints);
    let c = block(p0, p1, k, !diag_odd, rng, ints);
    let d = block(p0, p0, k, diag_odd, rng, ints);
    Supermatrix::new(a, b, c, d, parity).expect("grades are correct by construction")
}

/// An even supermatrix whose numerical `A` and `D` blocks are diagonally
/// dominant, so both superdeterminant forms are defined.
pub fn random_even_supermatrix<R: Rng + ?Sized>(
    k: usize,
    p1: usize,
    p0: usize,
    rng: &mut R,
    ints: SmallInts,
) -> Supermatrix {
    let x = random_supermatrix(k, p1, p0, Parity::Even, rng, ints);
    let shift = |n: usize| {
        let mut m = GMatrix::zeros(n, n, k);
        for i in 0..n {
            m[(i, i)] = GrassmannElement::scalar(k, Complex64::new(4.0, 0.0));
        }
        m
    };
    Supermatrix::new(
        x.a().add(&shift(p1)),
        x.b().clone(),
        x.c().clone(),
        x.d().add(&shift(p0)),
        Parity::Even,
    )
    .expect("grades are correct by construction")
}

fn numeric_block<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |i, j| {
        let v = Complex64::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
        if i == j {
            v + 2.0
        } else {
            v
        }
    })
}

/// A numerical block-diagonal `G` and its inverse.
pub fn random_block_diagonal<R: Rng + ?Sized>(
    k: usize,
    p1: usize,
    p0: usize,
    rng: &mut R,
) -> (Supermatrix, Supermatrix) {
    let ga = numeric_block(p1, rng);
    let gd = numeric_block(p0, rng);
    let inv_a = ga.clone().try_inverse().expect("diagonally dominant");
    let inv_d = gd.clone().try_inverse().expect("diagonally dominant");
    let build = |a: &DMatrix<Complex64>, d: &DMatrix<Complex64>| {
        Supermatrix::new(
            GMatrix::from_numeric(a, k),
            GMatrix::zeros(p1, p0, k),
            GMatrix::zeros(p0, p1, k),
            GMatrix::from_numeric(d, k),
            Parity::Even,
        )
        .expect("numerical blocks are even")
    };
    (build(&ga, &gd), build(&inv_a, &inv_d))
}
