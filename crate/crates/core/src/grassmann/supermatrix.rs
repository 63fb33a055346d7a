use nalgebra::DMatrix;
use num_complex::Complex64;

use super::element::GrassmannElement;
use crate::error::{Error, Result};

/// A dense matrix of Grassmann elements over a common generator count.
#[derive(Debug, Clone, PartialEq)]
pub struct GMatrix {
    rows: usize,
    cols: usize,
    k: usize,
    data: Vec<GrassmannElement>,
}

impl GMatrix {
    pub fn zeros(rows: usize, cols: usize, k: usize) -> Self {
        Self {
            rows,
            cols,
            k,
            data: vec![GrassmannElement::zero(k); rows * cols],
        }
    }

    pub fn identity(n: usize, k: usize) -> Self {
        let mut m = Self::zeros(n, n, k);
        for i in 0..n {
            m[(i, i)] = GrassmannElement::one(k);
        }
        m
    }

    /// Row-major construction; every entry must share the generator count `k`.
    pub fn from_rows(k: usize, rows: Vec<Vec<GrassmannElement>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Shape("ragged rows".into()));
            }
            for e in row {
                if e.generators() != k {
                    return Err(Error::GeneratorMismatch(e.generators(), k));
                }
                data.push(e);
            }
        }
        Ok(Self {
            rows: r,
            cols: c,
            k,
            data,
        })
    }

    pub fn from_numeric(m: &DMatrix<Complex64>, k: usize) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols(), k);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = GrassmannElement::scalar(k, m[(i, j)]);
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn generators(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> impl Iterator<Item = &GrassmannElement> {
        self.data.iter()
    }

    pub fn numeric(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].numerical_part())
    }

    pub fn nilpotent(&self) -> Self {
        Self {
            data: self.data.iter().map(GrassmannElement::nilpotent_part).collect(),
            ..self.clone()
        }
    }

    pub fn trace(&self) -> GrassmannElement {
        (0..self.rows.min(self.cols)).fold(GrassmannElement::zero(self.k), |acc, i| acc + self[(i, i)].clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols, self.k);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = GrassmannElement::zero(self.k);
                for t in 0..self.cols {
                    acc = acc + &self[(i, t)] * &other[(t, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            data: self.data.iter().map(|e| e.scale(s)).collect(),
            ..self.clone()
        }
    }

    fn zip(&self, other: &Self, f: impl Fn(&GrassmannElement, &GrassmannElement) -> GrassmannElement) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Self {
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
            ..self.clone()
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other)
            .data
            .iter()
            .map(GrassmannElement::max_abs)
            .fold(0.0, f64::max)
    }

    /// `M⁻¹ = Σ_m (−M₀⁻¹ M_n)^m M₀⁻¹`, which terminates because `M_n` is nilpotent.
    pub fn inverse(&self, what: &'static str) -> Result<Self> {
        let n = self.rows;
        let m0_inv = self.numeric().try_inverse().ok_or(Error::SingularBlock(what))?;
        let m0_inv = Self::from_numeric(&m0_inv, self.k);
        let t = m0_inv.mul(&self.nilpotent()).scale(Complex64::new(-1.0, 0.0));
        let mut term = Self::identity(n, self.k);
        let mut acc = Self::identity(n, self.k);
        for _ in 0..self.k {
            term = term.mul(&t);
            acc = acc.add(&term);
        }
        Ok(acc.mul(&m0_inv))
    }

    /// Determinant of a matrix with even entries:
    /// `Det(M₀) · exp(Tr log(1 + M₀⁻¹ M_n))`.
    pub fn det(&self, what: &'static str) -> Result<GrassmannElement> {
        let k = self.k;
        if self.rows == 0 {
            return Ok(GrassmannElement::one(k));
        }
        let m0 = self.numeric();
        let d0 = m0.determinant();
        let m0_inv = m0.try_inverse().ok_or(Error::SingularBlock(what))?;
        if d0.norm_sqr() == 0.0 {
            return Err(Error::SingularBlock(what));
        }
        let t = Self::from_numeric(&m0_inv, k).mul(&self.nilpotent());
        let mut power = Self::identity(self.rows, k);
        let mut log_trace = GrassmannElement::zero(k);
        for m in 1..=k {
            power = power.mul(&t);
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            log_trace = log_trace + power.trace().scale(Complex64::new(sign / m as f64, 0.0));
        }
        Ok(log_trace.exp().scale(d0))
    }
}

impl std::ops::Index<(usize, usize)> for GMatrix {
    type Output = GrassmannElement;

    fn index(&self, (i, j): (usize, usize)) -> &GrassmannElement {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for GMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut GrassmannElement {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    fn combine(self, other: Self) -> Self {
        if self.is_odd() != other.is_odd() {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// A `(p₁|p₀)` supermatrix `[[A, B], [C, D]]` with `A` acting on the odd
/// part (size `p₁`) and `D` on the even part (size `p₀`).
///
/// An even supermatrix has even `A`, `D` and odd `B`, `C` entries; an odd
/// one the reverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Supermatrix {
    a: GMatrix,
    b: GMatrix,
    c: GMatrix,
    d: GMatrix,
    parity: Parity,
}

fn all(m: &GMatrix, f: impl Fn(&GrassmannElement) -> bool) -> bool {
    m.entries().all(f)
}

impl Supermatrix {
    pub fn new(a: GMatrix, b: GMatrix, c: GMatrix, d: GMatrix, parity: Parity) -> Result<Self> {
        let (p1, p0) = (a.rows(), d.rows());
        if a.cols() != p1 || d.cols() != p0 || (b.rows(), b.cols()) != (p1, p0) || (c.rows(), c.cols()) != (p0, p1) {
            return Err(Error::Shape(format!(
                "blocks {}x{}, {}x{}, {}x{}, {}x{} do not form a square supermatrix",
                a.rows(),
                a.cols(),
                b.rows(),
                b.cols(),
                c.rows(),
                c.cols(),
                d.rows(),
                d.cols()
            )));
        }
        let k = a.generators();
        for m in [&b, &c, &d] {
            if m.generators() != k {
                return Err(Error::GeneratorMismatch(k, m.generators()));
            }
        }
        let (diag_ok, off_ok) = match parity {
            Parity::Even => (
                all(&a, GrassmannElement::is_even) && all(&d, GrassmannElement::is_even),
                all(&b, GrassmannElement::is_odd) && all(&c, GrassmannElement::is_odd),
            ),
            Parity::Odd => (
                all(&a, GrassmannElement::is_odd) && all(&d, GrassmannElement::is_odd),
                all(&b, GrassmannElement::is_even) && all(&c, GrassmannElement::is_even),
            ),
        };
        if !diag_ok || !off_ok {
            return Err(Error::Parity(format!(
                "block grading does not match a {parity:?} supermatrix"
            )));
        }
        Ok(Self { a, b, c, d, parity })
    }

    /// The even supermatrix `diag(A, D)` with numerical diagonal blocks.
    pub fn diagonal(k: usize, a: &[Complex64], d: &[Complex64]) -> Self {
        let diag = |v: &[Complex64]| {
            GMatrix::from_numeric(&DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(v)), k)
        };
        Self {
            a: diag(a),
            b: GMatrix::zeros(a.len(), d.len(), k),
            c: GMatrix::zeros(d.len(), a.len(), k),
            d: diag(d),
            parity: Parity::Even,
        }
    }

    pub fn identity(p1: usize, p0: usize, k: usize) -> Self {
        let ones = |n| vec![Complex64::new(1.0, 0.0); n];
        Self::diagonal(k, &ones(p1), &ones(p0))
    }

    pub fn a(&self) -> &GMatrix {
        &self.a
    }

    pub fn b(&self) -> &GMatrix {
        &self.b
    }

    pub fn c(&self) -> &GMatrix {
        &self.c
    }

    pub fn d(&self) -> &GMatrix {
        &self.d
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn generators(&self) -> usize {
        self.a.generators()
    }

    /// `(p₁, p₀)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.a.rows(), self.d.rows())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::Shape("supermatrix dimensions differ".into()));
        }
        if self.generators() != other.generators() {
            return Err(Error::GeneratorMismatch(self.generators(), other.generators()));
        }
        Ok(Self {
            a: self.a.mul(&other.a).add(&self.b.mul(&other.c)),
            b: self.a.mul(&other.b).add(&self.b.mul(&other.d)),
            c: self.c.mul(&other.a).add(&self.d.mul(&other.c)),
            d: self.c.mul(&other.b).add(&self.d.mul(&other.d)),
            parity: self.parity.combine(other.parity),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, GMatrix::add)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, GMatrix::sub)
    }

    fn combine(&self, other: &Self, f: impl Fn(&GMatrix, &GMatrix) -> GMatrix) -> Result<Self> {
        if self.dims() != other.dims() {
            return Err(Error::Shape("supermatrix dimensions differ".into()));
        }
        if self.parity != other.parity {
            return Err(Error::Parity("sum of supermatrices of different parity".into()));
        }
        Ok(Self {
            a: f(&self.a, &other.a),
            b: f(&self.b, &other.b),
            c: f(&self.c, &other.c),
            d: f(&self.d, &other.d),
            parity: self.parity,
        })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            a: self.a.scale(s),
            b: self.b.scale(s),
            c: self.c.scale(s),
            d: self.d.scale(s),
            parity: self.parity,
        }
    }

    /// Inverse of an even supermatrix through the Schur complement
    /// `S = A − B D⁻¹ C`.
    pub fn inverse(&self) -> Result<Self> {
        if self.parity.is_odd() {
            return Err(Error::Parity("only even supermatrices are inverted".into()));
        }
        let d_inv = self.d.inverse("D")?;
        let s_inv = self.a.sub(&self.b.mul(&d_inv).mul(&self.c)).inverse("A - B D^-1 C")?;
        let minus = Complex64::new(-1.0, 0.0);
        let b = s_inv.mul(&self.b).mul(&d_inv).scale(minus);
        let c = d_inv.mul(&self.c).mul(&s_inv).scale(minus);
        let d = d_inv.add(&d_inv.mul(&self.c).mul(&s_inv).mul(&self.b).mul(&d_inv));
        Ok(Self {
            a: s_inv,
            b,
            c,
            d,
            parity: Parity::Even,
        })
    }

    /// Graded commutator `XY − (−1)^{|X||Y|} YX`.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        let xy = self.mul(other)?;
        let yx = other.mul(self)?;
        let both_odd = self.parity.is_odd() && other.parity.is_odd();
        Ok(Self {
            a: if both_odd { xy.a.add(&yx.a) } else { xy.a.sub(&yx.a) },
            b: if both_odd { xy.b.add(&yx.b) } else { xy.b.sub(&yx.b) },
            c: if both_odd { xy.c.add(&yx.c) } else { xy.c.sub(&yx.c) },
            d: if both_odd { xy.d.add(&yx.d) } else { xy.d.sub(&yx.d) },
            parity: xy.parity,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.a.max_abs_diff(&other.a),
            self.b.max_abs_diff(&other.b),
            self.c.max_abs_diff(&other.c),
            self.d.max_abs_diff(&other.d),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// `Tr D − (−1)^{|X|} Tr A`; for even `X` this is `Tr D − Tr A`.
pub fn supertrace(x: &Supermatrix) -> GrassmannElement {
    let ta = x.a.trace();
    match x.parity {
        Parity::Even => x.d.trace() - ta,
        Parity::Odd => x.d.trace() + ta,
    }
}

fn require_even(x: &Supermatrix) -> Result<()> {
    if x.parity.is_odd() {
        return Err(Error::Parity("superdeterminant needs an even supermatrix".into()));
    }
    Ok(())
}

/// `Det(D) / Det(A − B D⁻¹ C)`.
pub fn sdet_form1(x: &Supermatrix) -> Result<GrassmannElement> {
    require_even(x)?;
    let d_inv = x.d.inverse("D")?;
    let schur = x.a.sub(&x.b.mul(&d_inv).mul(&x.c));
    let num = x.d.det("D")?;
    let den = schur.det("A - B D^-1 C")?;
    Ok(&num * &den.inverse()?)
}

/// `Det(D − C A⁻¹ B) / Det(A)`.
pub fn sdet_form2(x: &Supermatrix) -> Result<GrassmannElement> {
    require_even(x)?;
    let a_inv = x.a.inverse("A")?;
    let schur = x.d.sub(&x.c.mul(&a_inv).mul(&x.b));
    let num = schur.det("D - C A^-1 B")?;
    let den = x.a.det("A")?;
    Ok(&num * &den.inverse()?)
}

/// Superdeterminant, cross-checked against the second block form whenever
/// `A` is invertible too.
pub fn sdet(x: &Supermatrix) -> Result<GrassmannElement> {
    let f1 = sdet_form1(x)?;
    match sdet_form2(x) {
        Ok(f2) => {
            let diff = f1.max_abs_diff(&f2);
            if diff > 1e-12 * f1.max_abs().max(1.0) {
                return Err(Error::FormMismatch(diff));
            }
            Ok(f1)
        }
        Err(Error::SingularBlock(_)) => Ok(f1),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::random::{random_even_supermatrix, random_supermatrix, SmallInts};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn one_one(
        k: usize,
        a: GrassmannElement,
        b: GrassmannElement,
        cc: GrassmannElement,
        d: GrassmannElement,
    ) -> Supermatrix {
        let m = |e| GMatrix::from_rows(k, vec![vec![e]]).unwrap();
        Supermatrix::new(m(a), m(b), m(cc), m(d), Parity::Even).unwrap()
    }

    #[test]
    fn golden_sdet() {
        let k = 2;
        let beta = GrassmannElement::generator(k, 0);
        let gamma = GrassmannElement::generator(k, 1);
        let x = one_one(
            k,
            GrassmannElement::scalar(k, c(2.0)),
            beta.clone(),
            gamma.clone(),
            GrassmannElement::scalar(k, c(4.0)),
        );
        let want = GrassmannElement::scalar(k, c(2.0)) + (&beta * &gamma).scale(c(0.25));
        assert!(sdet(&x).unwrap().max_abs_diff(&want) < 1e-14);
        let diag = Supermatrix::diagonal(0, &[c(2.0)], &[c(6.0)]);
        assert!((sdet(&diag).unwrap().numerical_part() - c(3.0)).norm() < 1e-15);
    }

    #[test]
    fn supertrace_example() {
        let x = Supermatrix::diagonal(0, &[c(1.0)], &[c(3.0)]);
        assert_eq!(supertrace(&x).numerical_part(), c(2.0));
    }

    #[test]
    fn parity_contract() {
        let k = 1;
        let g = GrassmannElement::generator(k, 0);
        let m = |e| GMatrix::from_rows(k, vec![vec![e]]).unwrap();
        let one = GrassmannElement::one(k);
        assert!(matches!(
            Supermatrix::new(m(g.clone()), m(g.clone()), m(g.clone()), m(one.clone()), Parity::Even),
            Err(Error::Parity(_))
        ));
        assert!(Supermatrix::new(m(g.clone()), m(one.clone()), m(one.clone()), m(g), Parity::Odd).is_ok());
        assert!(matches!(
            Supermatrix::new(
                m(one.clone()),
                GMatrix::zeros(1, 2, k),
                GMatrix::zeros(1, 1, k),
                m(one),
                Parity::Even
            ),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn singular_blocks() {
        let x = Supermatrix::diagonal(0, &[c(2.0)], &[c(0.0)]);
        assert!(matches!(sdet(&x), Err(Error::SingularBlock(_))));
        // A singular only: form 1 still defined
        let x = Supermatrix::diagonal(0, &[c(0.0), c(1.0)], &[c(2.0)]);
        assert!(matches!(sdet_form1(&x), Err(Error::SingularBlock(_))));
    }

    #[test]
    fn grassmann_inverse_and_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = random_even_supermatrix(4, 2, 2, &mut rng, SmallInts(false));
            let inv = x.d().inverse("D").unwrap();
            assert!(inv.mul(x.d()).max_abs_diff(&GMatrix::identity(2, 4)) < 1e-12);
            // Det is multiplicative on even matrices
            let ad = x.a().mul(x.d());
            let lhs = ad.det("AD").unwrap();
            let rhs = &x.a().det("A").unwrap() * &x.d().det("D").unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-10 * rhs.max_abs().max(1.0));
        }
    }

    #[test]
    fn kernel_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for k in 0..=4 {
            for _ in 0..25 {
                let x = random_even_supermatrix(k, 2, 2, &mut rng, SmallInts(false));
                let y = random_even_supermatrix(k, 2, 2, &mut rng, SmallInts(false));
                let f1 = sdet_form1(&x).unwrap();
                let f2 = sdet_form2(&x).unwrap();
                assert!(f1.max_abs_diff(&f2) < 1e-12 * f1.max_abs().max(1.0));
                let xy = sdet(&x.mul(&y).unwrap()).unwrap();
                let prod = &sdet(&x).unwrap() * &sdet(&y).unwrap();
                assert!(xy.max_abs_diff(&prod) < 1e-12 * prod.max_abs().max(1.0));
            }
        }
    }

    #[test]
    fn inverse_and_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for k in 0..=4 {
            for _ in 0..10 {
                let g = random_even_supermatrix(k, 2, 2, &mut rng, SmallInts(false));
                let gi = g.inverse().unwrap();
                let id = Supermatrix::identity(2, 2, k);
                assert!(g.mul(&gi).unwrap().max_abs_diff(&id) < 1e-12);
                assert!(gi.mul(&g).unwrap().max_abs_diff(&id) < 1e-12);
                let x = random_even_supermatrix(k, 2, 2, &mut rng, SmallInts(false));
                let conj = g.mul(&x).unwrap().mul(&gi).unwrap();
                let (a, b) = (sdet(&x).unwrap(), sdet(&conj).unwrap());
                assert!(a.max_abs_diff(&b) < 1e-12 * a.max_abs().max(1.0));
            }
        }
        let odd = random_supermatrix(1, 1, 1, Parity::Odd, &mut rng, SmallInts(true));
        assert!(matches!(odd.inverse(), Err(Error::Parity(_))));
    }

    #[test]
    fn supertrace_of_bracket_vanishes_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..=4 {
            for _ in 0..20 {
                for (px, py) in [
                    (Parity::Even, Parity::Even),
                    (Parity::Even, Parity::Odd),
                    (Parity::Odd, Parity::Even),
                    (Parity::Odd, Parity::Odd),
                ] {
                    let x = random_supermatrix(k, 1, 1, px, &mut rng, SmallInts(true));
                    let y = random_supermatrix(k, 1, 1, py, &mut rng, SmallInts(true));
                    let s = supertrace(&x.bracket(&y).unwrap());
                    assert_eq!(s, GrassmannElement::zero(k), "{px:?} {py:?}");
                    let x = random_supermatrix(k, 2, 1, px, &mut rng, SmallInts(true));
                    let y = random_supermatrix(k, 2, 1, py, &mut rng, SmallInts(true));
                    assert_eq!(supertrace(&x.bracket(&y).unwrap()), GrassmannElement::zero(k));
                }
            }
        }
    }

    #[test]
    fn odd_odd_cyclicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let x = random_supermatrix(3, 1, 1, Parity::Odd, &mut rng, SmallInts(true));
            let y = random_supermatrix(3, 1, 1, Parity::Odd, &mut rng, SmallInts(true));
            let a = supertrace(&x.mul(&y).unwrap());
            let b = supertrace(&y.mul(&x).unwrap());
            assert_eq!(a, -b);
        }
    }
}
