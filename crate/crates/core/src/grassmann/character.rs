use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::Serialize;

use super::element::GrassmannElement;
use super::supermatrix::{GMatrix, Parity, Supermatrix};
use crate::error::{Error, Result};
use crate::haar_mc::{eigen_factor, mc_map, UnitarySample};

const CIRCLE_MARGIN: f64 = 1e-10;

fn check_spectrum(d: &DMatrix<Complex64>) -> Result<()> {
    if d.nrows() == 0 {
        return Ok(());
    }
    let schur = Schur::try_new(d.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    for i in 0..t.nrows() {
        let r = t[(i, i)].norm();
        if (r - 1.0).abs() < CIRCLE_MARGIN {
            return Err(Error::SpectrumOnCircle(r));
        }
    }
    Ok(())
}

/// Diagonal entries when `X` is numerical and diagonal, so the average is
/// a plain product of ratios.
fn numeric_diagonal(x: &Supermatrix) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
    let diag = |m: &GMatrix| -> Option<Vec<Complex64>> {
        let n = m.rows();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            for j in 0..n {
                let e = &m[(i, j)];
                if e.nilpotent_part().max_abs() != 0.0 || (i != j && e.numerical_part().norm_sqr() != 0.0) {
                    return None;
                }
            }
            out.push(m[(i, i)].numerical_part());
        }
        Some(out)
    };
    let zero = |m: &GMatrix| m.entries().all(|e| e.max_abs() == 0.0);
    if x.parity() != Parity::Even || !zero(x.b()) || !zero(x.c()) || x.a().rows() != x.d().rows() {
        return None;
    }
    Some((diag(x.a())?, diag(x.d())?))
}

fn per_eigenvalue(x: &Supermatrix, lambda: Complex64) -> Result<GrassmannElement> {
    let (p1, p0) = x.dims();
    let k = x.generators();
    let minus = Complex64::new(-1.0, 0.0) * lambda;
    let a = GMatrix::identity(p1, k).add(&x.a().scale(minus));
    let b = x.b().scale(minus);
    let c = x.c().scale(minus);
    let d = GMatrix::identity(p0, k).add(&x.d().scale(minus));
    let d_inv = d.inverse("1 - lambda D")?;
    let schur = a.sub(&b.mul(&d_inv).mul(&c));
    let num = schur.det("A' - B' D'^-1 C'")?;
    let den = d.det("1 - lambda D")?;
    Ok(&num * &den.inverse()?)
}

/// `SDet(Id − X ⊗ u)⁻¹` for `u` with the given spectrum: the Kronecker
/// structure splits over eigenvalues into a product of
/// `Det(A' − B' D'⁻¹ C') / Det(D')` with `Id − λX = [[A', B'], [C', D']]`.
pub fn sdet_inv_id_minus_kron(x: &Supermatrix, sample: &UnitarySample) -> Result<GrassmannElement> {
    if x.parity() != Parity::Even {
        return Err(Error::Parity("the character needs an even supermatrix".into()));
    }
    check_spectrum(&x.d().numeric())?;
    let k = x.generators();
    if let Some((xs, ys)) = numeric_diagonal(x) {
        let mut acc = Complex64::new(1.0, 0.0);
        for &l in sample.eigenvalues() {
            acc *= eigen_factor(&xs, &ys, l)?;
        }
        return Ok(GrassmannElement::scalar(k, acc));
    }
    let mut acc = GrassmannElement::one(k);
    for &l in sample.eigenvalues() {
        acc = &acc * &per_eigenvalue(x, l)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrassmannEstimate {
    /// Coefficients of the mean, indexed by generator bitmask.
    pub mean: Vec<Complex64>,
    /// Per-coefficient standard error (larger of real and imaginary).
    pub stderr: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
    #[serde(skip)]
    pub generators: usize,
}

impl GrassmannEstimate {
    pub fn mean_element(&self) -> GrassmannElement {
        GrassmannElement::from_coeffs(self.generators, self.mean.clone()).expect("length 2^k")
    }
}

/// Monte Carlo average of [`sdet_inv_id_minus_kron`] over Haar samples of
/// dimension `n`, coefficient by coefficient.
pub fn grassmann_character_mc(x: &Supermatrix, n: usize, samples: u64, seed: u64) -> Result<GrassmannEstimate> {
    if x.parity() != Parity::Even {
        return Err(Error::Parity("the character needs an even supermatrix".into()));
    }
    check_spectrum(&x.d().numeric())?;
    let k = x.generators();
    let acc = mc_map(n, 1 << k, samples, seed, |s| {
        Ok(sdet_inv_id_minus_kron(x, s)?.coeffs().to_vec())
    })?;
    Ok(GrassmannEstimate {
        mean: acc.mean().to_vec(),
        stderr: (0..1 << k).map(|c| acc.stderr(c)).collect(),
        samples: acc.count(),
        seed,
        generators: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::random::random_block_diagonal;
    use crate::haar_mc::{eval_z, mc_estimate, sample_haar_unitary, sample_stream};
    use crate::params::SpectralParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn golden() -> SpectralParams {
        SpectralParams::new(1, 1, 1, vec![c(2.0), c(3.0)], vec![c(0.5), c(4.0)]).unwrap()
    }

    fn one_one(k: usize, a: Complex64, beta: GrassmannElement, gamma: GrassmannElement, d: Complex64) -> Supermatrix {
        let m = |e| GMatrix::from_rows(k, vec![vec![e]]).unwrap();
        Supermatrix::new(
            m(GrassmannElement::scalar(k, a)),
            m(beta),
            m(gamma),
            m(GrassmannElement::scalar(k, d)),
            Parity::Even,
        )
        .unwrap()
    }

    #[test]
    fn diagonal_point_matches_integrand() {
        let prm = golden();
        let x = Supermatrix::diagonal(0, prm.xs(), prm.ys());
        let s = UnitarySample::new(vec![c(1.0)]).unwrap();
        let v = sdet_inv_id_minus_kron(&x, &s).unwrap();
        assert!((v.numerical_part() - c(-4.0 / 3.0)).norm() < 1e-15);
        let same = Supermatrix::diagonal(2, &[c(0.5), c(4.0)], &[c(0.5), c(4.0)]);
        let v = sdet_inv_id_minus_kron(&same, &s).unwrap();
        assert_eq!(v, GrassmannElement::one(2));
    }

    #[test]
    fn one_one_hand_expansion() {
        let k = 2;
        let (a, d) = (c(2.0), c(0.5));
        let beta = GrassmannElement::generator(k, 0);
        let gamma = GrassmannElement::generator(k, 1);
        let x = one_one(k, a, beta.clone(), gamma.clone(), d);
        let s = UnitarySample::new(vec![c(1.0)]).unwrap();
        let got = sdet_inv_id_minus_kron(&x, &s).unwrap();
        // (1 − a)/(1 − d) − βγ/(1 − d)²
        let want =
            GrassmannElement::scalar(k, (1.0 - a) / (1.0 - d)) - (&beta * &gamma).scale(1.0 / ((1.0 - d) * (1.0 - d)));
        assert!(got.max_abs_diff(&want) < 1e-15);
        // the general path agrees with the diagonal fast path
        let zero = GrassmannElement::zero(k);
        let x = one_one(k, a, zero.clone(), zero, d);
        let general = per_eigenvalue(&x, c(1.0)).unwrap();
        assert!((general.numerical_part() - (1.0 - a) / (1.0 - d)).norm() < 1e-15);
    }

    #[test]
    fn spectrum_on_circle() {
        let x = Supermatrix::diagonal(0, &[c(2.0)], &[c(1.0)]);
        let s = UnitarySample::new(vec![c(1.0)]).unwrap();
        assert!(matches!(
            sdet_inv_id_minus_kron(&x, &s),
            Err(Error::SpectrumOnCircle(_))
        ));
    }

    #[test]
    fn zero_generators_reproduce_mc_estimate() {
        let prm = SpectralParams::new(1, 1, 2, vec![c(2.0), c(3.0)], vec![c(0.5), c(4.0)]).unwrap();
        let x = Supermatrix::diagonal(0, prm.xs(), prm.ys());
        let g = grassmann_character_mc(&x, 2, 3000, 9).unwrap();
        let e = mc_estimate(&prm, 3000, 9).unwrap();
        assert_eq!(g.mean[0], e.mean);
        assert_eq!(g.stderr[0], e.stderr);
    }

    #[test]
    fn conjugation_invariance_per_sample() {
        let k = 2;
        let prm = golden();
        let beta = GrassmannElement::generator(k, 0).scale(c(0.3));
        let gamma = GrassmannElement::generator(k, 1).scale(c(0.7));
        let mut x = Supermatrix::diagonal(k, prm.xs(), prm.ys());
        // couple the first odd and even slots through the generators
        let mut b = x.b().clone();
        let mut cc = x.c().clone();
        b[(0, 0)] = beta;
        cc[(0, 0)] = gamma;
        x = Supermatrix::new(x.a().clone(), b, cc, x.d().clone(), Parity::Even).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (g, gi) = random_block_diagonal(k, 2, 2, &mut rng);
        let conj = g.mul(&x).unwrap().mul(&gi).unwrap();
        for i in 0..10 {
            let s = sample_haar_unitary(3, &mut sample_stream(4, i)).unwrap();
            let a = sdet_inv_id_minus_kron(&x, &s).unwrap();
            let b = sdet_inv_id_minus_kron(&conj, &s).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-11 * a.max_abs().max(1.0));
            let prm3 = prm.with_dim(3).unwrap();
            assert!((a.numerical_part() - eval_z(&prm3, &s).unwrap()).norm() < 1e-12);
        }
    }
}
