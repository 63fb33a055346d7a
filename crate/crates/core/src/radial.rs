//! Radial-operator checks on the torus.
//!
//! A point is `(ψ, φ)` with `x_k = e^{iψ_k}`, `y_k = e^{φ_k}`. The positive
//! roots are
//!
//! * even: `iψ_k − iψ_k'` and `φ_k − φ_k'` for `k' < k`;
//! * odd: `iψ_k − φ_j` for `j ≤ p`, and `φ_l − iψ_k` for `l > p`.
//!
//! `J = ∏ sinh²(α/2) / ∏ sinh²(β/2)` over even `α` and odd `β`, and the
//! operators `D_ℓ = Σ ∂^ℓ/∂ψ_k^ℓ − (−i)^ℓ Σ ∂^ℓ/∂φ_k^ℓ` annihilate `J^{1/2} χ`.
//! Derivatives come from jets, so the checks carry only roundoff.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngExt};

use crate::error::{Error, Result};
use crate::formula::thm1_generic;
use crate::jets::{seed_jets, Jet};
use crate::params::SpectralParams;
use crate::scalar::Scalar;

/// Below this regularity margin a point is treated as singular.
pub const MIN_MARGIN: f64 = 1e-6;

/// Scalars that also support `exp`.
pub trait Analytic: Scalar {
    fn exp(&self) -> Self;
}

impl Analytic for Complex64 {
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
}

impl Analytic for Jet {
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
}

/// `Σ c_k · iψ_k + Σ d_k · φ_k`.
#[derive(Debug, Clone, PartialEq)]
struct Form {
    psi: Vec<f64>,
    phi: Vec<f64>,
}

impl Form {
    fn zero(n: usize) -> Self {
        Self {
            psi: vec![0.0; n],
            phi: vec![0.0; n],
        }
    }

    fn eval<S: Scalar>(&self, psi: &[S], phi: &[S]) -> S {
        let mut acc = psi[0].constant_like(Complex64::new(0.0, 0.0));
        for (c, v) in self.psi.iter().zip(psi) {
            if *c != 0.0 {
                acc = acc + v.constant_like(Complex64::new(0.0, *c)) * v.clone();
            }
        }
        for (d, v) in self.phi.iter().zip(phi) {
            if *d != 0.0 {
                acc = acc + v.constant_like(Complex64::new(*d, 0.0)) * v.clone();
            }
        }
        acc
    }
}

fn positive_roots(p: usize, n: usize) -> (Vec<Form>, Vec<Form>) {
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for k in 0..n {
        for k2 in 0..k {
            let mut a = Form::zero(n);
            a.psi[k] = 1.0;
            a.psi[k2] = -1.0;
            even.push(a);
            let mut b = Form::zero(n);
            b.phi[k] = 1.0;
            b.phi[k2] = -1.0;
            even.push(b);
        }
    }
    for k in 0..n {
        for j in 0..p {
            let mut b = Form::zero(n);
            b.psi[k] = 1.0;
            b.phi[j] = -1.0;
            odd.push(b);
        }
        for l in p..n {
            let mut b = Form::zero(n);
            b.phi[l] = 1.0;
            b.psi[k] = -1.0;
            odd.push(b);
        }
    }
    (even, odd)
}

/// Half the even roots minus half the odd roots, which works out to
/// `Σ(k − p − ½) iψ_k + Σ_{j≤p}(j − ½) φ_j + Σ_{l>p}(l − n − ½) φ_l` (1-based).
fn delta(p: usize, n: usize) -> Form {
    let mut d = Form::zero(n);
    for k in 0..n {
        let k1 = (k + 1) as f64;
        d.psi[k] = k1 - p as f64 - 0.5;
        d.phi[k] = if k < p { k1 - 0.5 } else { k1 - n as f64 - 0.5 };
    }
    d
}

/// A torus point with `φ_j < 0 < φ_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPoint {
    p: usize,
    q: usize,
    psi: Vec<f64>,
    phi: Vec<f64>,
    margin: f64,
}

impl RadialPoint {
    pub fn new(p: usize, q: usize, psi: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let n = p + q;
        if n == 0 {
            return Err(Error::Value("p + q must be at least 1".into()));
        }
        if psi.len() != n || phi.len() != n {
            return Err(Error::Shape(format!("expected {n} angles of each kind")));
        }
        if psi.iter().chain(&phi).any(|v| !v.is_finite()) {
            return Err(Error::Value("angles must be finite".into()));
        }
        for (i, &f) in phi.iter().enumerate() {
            if (i < p && f >= 0.0) || (i >= p && f <= 0.0) {
                return Err(Error::DomainViolation {
                    index: i + 1,
                    detail: format!("phi_{} = {f} has the wrong sign", i + 1),
                });
            }
        }
        let (even, odd) = positive_roots(p, n);
        let ps: Vec<Complex64> = psi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let fs: Vec<Complex64> = phi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let margin = even
            .iter()
            .chain(&odd)
            .map(|r| (1.0 - (-r.eval(&ps, &fs)).exp()).norm())
            .fold(f64::INFINITY, f64::min);
        Ok(Self { p, q, psi, phi, margin })
    }

    /// A random point with every margin comfortably above [`MIN_MARGIN`].
    pub fn random<R: Rng + ?Sized>(p: usize, q: usize, rng: &mut R) -> Result<Self> {
        loop {
            let psi = (0..p + q)
                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                .collect();
            let phi = (0..p + q)
                .map(|i| {
                    let r = rng.random_range(0.2..1.2);
                    if i < p {
                        -r
                    } else {
                        r
                    }
                })
                .collect();
            let pt = Self::new(p, q, psi, phi)?;
            if pt.margin > 1e-2 {
                return Ok(pt);
            }
        }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// `min |1 − e^{−α}|` over all positive roots.
    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn to_params(&self, n: usize) -> Result<SpectralParams> {
        let (psi, phi) = self.complex_angles();
        SpectralParams::from_angles(self.p, self.q, n, &psi, &phi)
    }

    fn check_regular(&self) -> Result<()> {
        if self.margin < MIN_MARGIN {
            return Err(Error::SingularPoint {
                margin: self.margin,
                required: MIN_MARGIN,
            });
        }
        Ok(())
    }

    fn complex_angles(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let c = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        (c(&self.psi), c(&self.phi))
    }
}

fn sinh_half(z: Complex64) -> Complex64 {
    ((z * 0.5).exp() - (-z * 0.5).exp()) * 0.5
}

/// `J` from its sinh-product definition.
pub fn eval_j(point: &RadialPoint) -> Result<Complex64> {
    point.check_regular()?;
    let (psi, phi) = point.complex_angles();
    let (even, odd) = positive_roots(point.p, point.p + point.q);
    let mut j = Complex64::new(1.0, 0.0);
    for a in &even {
        let s = sinh_half(a.eval(&psi, &phi));
        j *= s * s;
    }
    for b in &odd {
        let s = sinh_half(b.eval(&psi, &phi));
        j /= s * s;
    }
    Ok(j)
}

/// `e^δ ∏ ½(1 − e^{−α}) / ∏ ½(1 − e^{−β})` over any analytic scalar.
pub fn sqrt_j_generic<S: Analytic>(p: usize, psi: &[S], phi: &[S]) -> S {
    let n = psi.len();
    let (even, odd) = positive_roots(p, n);
    let one = psi[0].one_like();
    let half = psi[0].constant_like(Complex64::new(0.5, 0.0));
    let mut acc = delta(p, n).eval(psi, phi).exp();
    for a in &even {
        let e = (-a.eval(psi, phi)).exp();
        acc = acc * (half.clone() * (one.clone() - e));
    }
    for b in &odd {
        let e = (-b.eval(psi, phi)).exp();
        acc = acc / (half.clone() * (one.clone() - e));
    }
    acc
}

/// `J^{1/2}`. The factor `e^δ` is the exponential of a linear form in the
/// real angles, so the value is single-valued on the torus and never
/// touches a branch cut.
pub fn eval_sqrt_j(point: &RadialPoint) -> Result<Complex64> {
    point.check_regular()?;
    let (psi, phi) = point.complex_angles();
    Ok(sqrt_j_generic(point.p, &psi, &phi))
}

/// χ as a function of the angles, over any analytic scalar.
pub fn chi_generic<S: Analytic>(p: usize, n_dim: usize, psi: &[S], phi: &[S]) -> Result<S> {
    let i = psi[0].constant_like(Complex64::i());
    let xs: Vec<S> = psi.iter().map(|v| (i.clone() * v.clone()).exp()).collect();
    let ys: Vec<S> = phi.iter().map(Analytic::exp).collect();
    thm1_generic(p, psi.len() - p, n_dim, &xs, &ys)
}

/// `D_ℓ f` together with the largest `m!·|c_m|`, `m ≤ ℓ`, seen along the way.
fn apply_dl_scaled<F>(f: F, point: &RadialPoint, l: usize) -> Result<(Complex64, f64)>
where
    F: Fn(&[Jet], &[Jet]) -> Result<Jet>,
{
    if l == 0 {
        return Err(Error::Value("operator order must be at least 1".into()));
    }
    let n = point.p + point.q;
    let (psi, phi) = point.complex_angles();
    let mut sum_psi = Complex64::new(0.0, 0.0);
    let mut sum_phi = Complex64::new(0.0, 0.0);
    let mut scale: f64 = 0.0;
    for var in 0..2 * n {
        let (jp, jf) = if var < n {
            (seed_jets(&psi, var, l), seed_jets(&phi, usize::MAX, l))
        } else {
            (seed_jets(&psi, usize::MAX, l), seed_jets(&phi, var - n, l))
        };
        let jet = f(&jp, &jf)?;
        for m in 0..=l {
            scale = scale.max(jet.derivative(m).norm());
        }
        if var < n {
            sum_psi += jet.derivative(l);
        } else {
            sum_phi += jet.derivative(l);
        }
    }
    let minus_i_pow = (-Complex64::i()).powu(l as u32);
    Ok((sum_psi - minus_i_pow * sum_phi, scale))
}

/// `Σ_k ∂^ℓ f/∂ψ_k^ℓ − (−i)^ℓ Σ_k ∂^ℓ f/∂φ_k^ℓ` at the point. `f` receives
/// jets for `ψ` and `φ`.
pub fn apply_dl<F>(f: F, point: &RadialPoint, l: usize) -> Result<Complex64>
where
    F: Fn(&[Jet], &[Jet]) -> Result<Jet>,
{
    Ok(apply_dl_scaled(f, point, l)?.0)
}

/// `|D_ℓ f| / scale` for an arbitrary jet-evaluable `f`.
pub fn residual_of<F>(f: F, point: &RadialPoint, l: usize) -> Result<f64>
where
    F: Fn(&[Jet], &[Jet]) -> Result<Jet>,
{
    point.check_regular()?;
    let (v, scale) = apply_dl_scaled(f, point, l)?;
    Ok(if scale == 0.0 { v.norm() } else { v.norm() / scale })
}

/// Scaled residual of `D_ℓ (J^{1/2} χ)` for matrix dimension `n_dim`.
pub fn pde_residual(point: &RadialPoint, n_dim: usize, l: usize) -> Result<f64> {
    let p = point.p;
    residual_of(
        |psi, phi| Ok(sqrt_j_generic(p, psi, phi) * chi_generic(p, n_dim, psi, phi)?),
        point,
        l,
    )
}

/// Like [`pde_residual`] with `χ` replaced by `χ + eps·e^{iψ₁}`, which is
/// not in the kernel.
pub fn perturbed_pde_residual(point: &RadialPoint, n_dim: usize, l: usize, eps: f64) -> Result<f64> {
    let p = point.p;
    residual_of(
        |psi, phi| {
            let bump = (psi[0].constant_like(Complex64::new(0.0, 1.0)) * psi[0].clone()).exp();
            let chi = chi_generic(p, n_dim, psi, phi)? + bump.scale(Complex64::new(eps, 0.0));
            Ok(sqrt_j_generic(p, psi, phi) * chi)
        },
        point,
        l,
    )
}

/// Scaled residual of `D_k J^{1/2}`.
pub fn sqrt_j_residual(point: &RadialPoint, k: usize) -> Result<f64> {
    let p = point.p;
    residual_of(|psi, phi| Ok(sqrt_j_generic(p, psi, phi)), point, k)
}

/// `D_ℓ` eigenvalue of `e^{Σ(i m_k ψ_k − n_k φ_k)}`: `i^ℓ Σ(m_k^ℓ − n_k^ℓ)`.
pub fn weight_eigenvalue(m: &[i64], n: &[i64], l: u32) -> Complex64 {
    let s: f64 = m.iter().map(|&v| (v as f64).powi(l as i32)).sum::<f64>()
        - n.iter().map(|&v| (v as f64).powi(l as i32)).sum::<f64>();
    Complex64::i().powu(l) * s
}

/// Compact-torus density `∏ sin²((ψ_a−ψ_a')/2) ∏ sin²((θ_b−θ_b')/2) / ∏ sin²((ψ_a−θ_b)/2)`.
pub fn compact_j(psi: &[f64], theta: &[f64]) -> Result<f64> {
    if psi.len() != theta.len() || psi.is_empty() {
        return Err(Error::Shape("need equally many ψ and θ angles".into()));
    }
    let s2 = |a: f64, b: f64| ((a - b) / 2.0).sin().powi(2);
    let mut j = 1.0;
    for v in [psi, theta] {
        for a in 0..v.len() {
            for b in 0..a {
                j *= s2(v[a], v[b]);
            }
        }
    }
    for &a in psi {
        for &b in theta {
            let d = s2(a, b);
            if d == 0.0 {
                return Err(Error::SingularPoint {
                    margin: 0.0,
                    required: MIN_MARGIN,
                });
            }
            j /= d;
        }
    }
    Ok(j)
}

/// `Det[1/sin((ψ_a − θ_b)/2)]²`.
pub fn cauchy_det_squared(psi: &[f64], theta: &[f64]) -> Result<f64> {
    if psi.len() != theta.len() || psi.is_empty() {
        return Err(Error::Shape("need equally many ψ and θ angles".into()));
    }
    let n = psi.len();
    let m = DMatrix::from_fn(n, n, |a, b| 1.0 / ((psi[a] - theta[b]) / 2.0).sin());
    Ok(m.determinant().powi(2))
}

/// The sinh-product `J` with complex `φ`; used to compare against the
/// compact form at `φ = iθ`.
pub fn eval_j_complex(p: usize, psi: &[Complex64], phi: &[Complex64]) -> Complex64 {
    let (even, odd) = positive_roots(p, psi.len());
    let mut j = Complex64::new(1.0, 0.0);
    for a in &even {
        let s = sinh_half(a.eval(psi, phi));
        j *= s * s;
    }
    for b in &odd {
        let s = sinh_half(b.eval(psi, phi));
        j /= s * s;
    }
    j
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt() -> RadialPoint {
        RadialPoint::new(1, 1, vec![0.3, 1.1], vec![-0.4, 0.7]).unwrap()
    }

    /// Direct substitution for p = q = 1: one even root of each kind, odd
    /// roots iψ_1 − φ_1, iψ_2 − φ_1, φ_2 − iψ_1, φ_2 − iψ_2.
    fn j_by_hand(psi: [f64; 2], phi: [f64; 2]) -> Complex64 {
        let i = Complex64::i();
        let sh = |z: Complex64| (z / 2.0).sinh();
        let even = sh(i * (psi[1] - psi[0])).powi(2) * sh(Complex64::new(phi[1] - phi[0], 0.0)).powi(2);
        let odd = sh(i * psi[0] - phi[0]) * sh(i * psi[1] - phi[0]) * sh(phi[1] - i * psi[0]) * sh(phi[1] - i * psi[1]);
        even / odd.powi(2)
    }

    #[test]
    fn j_matches_direct_substitution() {
        let j = eval_j(&pt()).unwrap();
        let want = j_by_hand([0.3, 1.1], [-0.4, 0.7]);
        assert!((j - want).norm() < 1e-13 * want.norm());
        let s = eval_sqrt_j(&pt()).unwrap();
        assert!((s * s - j).norm() < 1e-12 * j.norm());
    }

    #[test]
    fn delta_is_half_sum_of_graded_roots() {
        for (p, q) in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 0)] {
            let n = p + q;
            let (even, odd) = positive_roots(p, n);
            let mut half = Form::zero(n);
            for r in &even {
                for k in 0..n {
                    half.psi[k] += r.psi[k] / 2.0;
                    half.phi[k] += r.phi[k] / 2.0;
                }
            }
            for r in &odd {
                for k in 0..n {
                    half.psi[k] -= r.psi[k] / 2.0;
                    half.phi[k] -= r.phi[k] / 2.0;
                }
            }
            assert_eq!(half, delta(p, n));
        }
    }

    #[test]
    fn point_validation() {
        assert!(matches!(
            RadialPoint::new(1, 1, vec![0.3, 1.1], vec![0.4, 0.7]),
            Err(Error::DomainViolation { index: 1, .. })
        ));
        let wall = RadialPoint::new(1, 1, vec![0.3, 0.3], vec![-0.4, 0.7]).unwrap();
        assert!(matches!(eval_j(&wall), Err(Error::SingularPoint { .. })));
    }

    #[test]
    fn dl_examples() {
        let p = pt();
        // e^{i(2ψ₁+ψ₂) − (φ₁+2φ₂)}: eigenvalue i²(4 + 1 − 1 − 4) = 0
        let f = |psi: &[Jet], phi: &[Jet]| {
            let i = Complex64::i();
            let arg = psi[0].scale(i * 2.0) + psi[1].scale(i) - phi[0].clone() - phi[1].scale(Complex64::new(2.0, 0.0));
            Ok(arg.exp())
        };
        assert!(apply_dl(f, &p, 2).unwrap().norm() < 1e-13);
        let g = |psi: &[Jet], phi: &[Jet]| Ok((psi[0].scale(Complex64::new(0.0, 2.0)) - phi[1].clone()).exp());
        let value = (Complex64::new(0.0, 2.0 * 0.3) - 0.7).exp();
        let d = apply_dl(g, &p, 2).unwrap();
        assert!((d - value * -3.0).norm() < 1e-13);
        assert!((weight_eigenvalue(&[2, 0], &[0, 1], 2) - Complex64::new(-3.0, 0.0)).norm() < 1e-15);
        let one = |psi: &[Jet], _: &[Jet]| Ok(psi[0].one_like());
        for l in 1..5 {
            assert_eq!(apply_dl(one, &p, l).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn joint_kernel_is_equal_multisets() {
        let p = pt();
        let range = -2i64..=2;
        for m0 in range.clone() {
            for m1 in range.clone() {
                for n0 in range.clone() {
                    for n1 in range.clone() {
                        let f = |psi: &[Jet], phi: &[Jet]| {
                            let i = Complex64::i();
                            let arg = psi[0].scale(i * m0 as f64) + psi[1].scale(i * m1 as f64)
                                - phi[0].scale(Complex64::new(n0 as f64, 0.0))
                                - phi[1].scale(Complex64::new(n1 as f64, 0.0));
                            Ok(arg.exp())
                        };
                        let killed = (1..=4).all(|l| residual_of(f, &p, l).unwrap() < 1e-12);
                        let mut a = [m0, m1];
                        let mut b = [n0, n1];
                        a.sort_unstable();
                        b.sort_unstable();
                        assert_eq!(killed, a == b, "m=({m0},{m1}) n=({n0},{n1})");
                    }
                }
            }
        }
    }

    #[test]
    fn annihilation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for (p, q) in [(1, 1), (2, 1), (2, 2)] {
            for _ in 0..3 {
                let point = RadialPoint::random(p, q, &mut rng).unwrap();
                for k in 1..=4 {
                    assert!(sqrt_j_residual(&point, k).unwrap() < 1e-8);
                }
                for n in 1..=3 {
                    for l in 1..=3 {
                        let r = pde_residual(&point, n, l).unwrap();
                        assert!(r < 1e-8, "p={p} q={q} N={n} l={l}: {r}");
                    }
                }
            }
        }
    }

    #[test]
    fn negative_control() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let point = RadialPoint::random(1, 1, &mut rng).unwrap();
        for l in 1..=3 {
            assert!(perturbed_pde_residual(&point, 1, l, 1e-3).unwrap() > 1e-5);
        }
    }

    #[test]
    fn cauchy_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..=3 {
            for _ in 0..10 {
                let psi: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
                let theta: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
                let a = compact_j(&psi, &theta).unwrap();
                let b = cauchy_det_squared(&psi, &theta).unwrap();
                assert!((a - b).abs() <= 1e-10 * a.abs(), "{a} vs {b}");
                // the sinh form at φ = iθ differs by (−1)^n
                let cp: Vec<Complex64> = psi.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                let ct: Vec<Complex64> = theta.iter().map(|&v| Complex64::new(0.0, v)).collect();
                let u = eval_j_complex(1, &cp, &ct);
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert!((u - sign * a).norm() <= 1e-10 * a.abs());
            }
        }
    }
}
