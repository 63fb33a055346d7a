//! Parameter records for the correlation problem.
//!
//! Parameters are stored as exponentials: `x_k = e^{iψ_k}` for the
//! numerator factors and `y_k = e^{φ_k}` for the denominator factors.
//! Indices `0..p` are the "u-type" slots and `p..p+q` the conjugate slots.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default ceiling on the number of cosets a single evaluation may visit.
pub const DEFAULT_COSET_LIMIT: u128 = 1_000_000;

/// Unvalidated parameter record, as read from JSON or flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub p: usize,
    pub q: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub xs: Vec<[f64; 2]>,
    pub ys: Vec<[f64; 2]>,
}

/// A validated parameter set `(p, q, N, x, y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct SpectralParams {
    p: usize,
    q: usize,
    n: usize,
    xs: Vec<Complex64>,
    ys: Vec<Complex64>,
}

fn to_complex(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

fn to_pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|c| [c.re, c.im]).collect()
}

fn check_finite(label: &str, v: &[Complex64]) -> Result<()> {
    for (i, c) in v.iter().enumerate() {
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::Value(format!("{label}[{}] is not finite", i + 1)));
        }
    }
    Ok(())
}

fn check_nonzero(label: &str, v: &[Complex64]) -> Result<()> {
    for (i, c) in v.iter().enumerate() {
        if c.norm_sqr() == 0.0 {
            return Err(Error::Value(format!("{label}[{}] is zero", i + 1)));
        }
    }
    Ok(())
}

/// Checks `|y_j| < 1` on the first `inner` entries and `|y_l| > 1` on the rest.
fn check_moduli(ys: &[Complex64], inner: usize) -> Result<()> {
    for (i, y) in ys.iter().enumerate() {
        let r = y.norm();
        if i < inner && r >= 1.0 {
            return Err(Error::DomainViolation {
                index: i + 1,
                detail: format!("|y_{}| = {r} must be < 1 in a contracting slot", i + 1),
            });
        }
        if i >= inner && r <= 1.0 {
            return Err(Error::DomainViolation {
                index: i + 1,
                detail: format!("|y_{}| = {r} must be > 1 in an expanding slot", i + 1),
            });
        }
    }
    Ok(())
}

impl SpectralParams {
    /// Validates a raw record.
    pub fn validate(raw: &RawParams) -> Result<Self> {
        Self::new(raw.p, raw.q, raw.n, to_complex(&raw.xs), to_complex(&raw.ys))
    }

    pub fn new(p: usize, q: usize, n: usize, xs: Vec<Complex64>, ys: Vec<Complex64>) -> Result<Self> {
        if p + q == 0 {
            return Err(Error::Value("p + q must be at least 1".into()));
        }
        if n == 0 {
            return Err(Error::Value("N must be at least 1".into()));
        }
        if xs.len() != p + q || ys.len() != p + q {
            return Err(Error::Shape(format!(
                "expected {} values in xs and ys, got {} and {}",
                p + q,
                xs.len(),
                ys.len()
            )));
        }
        check_finite("xs", &xs)?;
        check_finite("ys", &ys)?;
        check_nonzero("xs", &xs)?;
        check_moduli(&ys, p)?;
        Ok(Self { p, q, n, xs, ys })
    }

    /// Builds parameters from angles: `x_k = e^{iψ_k}`, `y_k = e^{φ_k}`.
    pub fn from_angles(p: usize, q: usize, n: usize, psi: &[Complex64], phi: &[Complex64]) -> Result<Self> {
        let i = Complex64::i();
        let xs = psi.iter().map(|a| (i * a).exp()).collect();
        let ys = phi.iter().map(|b| b.exp()).collect();
        Self::new(p, q, n, xs, ys)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Matrix dimension `N`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of ratio factors, `p + q`.
    pub fn len(&self) -> usize {
        self.p + self.q
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn xs(&self) -> &[Complex64] {
        &self.xs
    }

    pub fn ys(&self) -> &[Complex64] {
        &self.ys
    }

    pub fn to_raw(&self) -> RawParams {
        RawParams {
            p: self.p,
            q: self.q,
            n: self.n,
            xs: to_pairs(&self.xs),
            ys: to_pairs(&self.ys),
        }
    }

    /// Returns a copy with different `x` values, revalidated.
    pub fn with_xs(&self, xs: Vec<Complex64>) -> Result<Self> {
        Self::new(self.p, self.q, self.n, xs, self.ys.clone())
    }

    pub fn with_ys(&self, ys: Vec<Complex64>) -> Result<Self> {
        Self::new(self.p, self.q, self.n, self.xs.clone(), ys)
    }

    pub fn with_dim(&self, n: usize) -> Result<Self> {
        Self::new(self.p, self.q, n, self.xs.clone(), self.ys.clone())
    }

    /// `e^{λ_N} = ∏_{l>p} (x_l / y_l)^N`.
    pub fn highest_weight_multiplier(&self) -> Complex64 {
        highest_weight_multiplier(self)
    }
}

impl TryFrom<RawParams> for SpectralParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        Self::validate(&raw)
    }
}

impl From<SpectralParams> for RawParams {
    fn from(p: SpectralParams) -> Self {
        p.to_raw()
    }
}

/// Free-function form of [`SpectralParams::validate`].
pub fn validate(raw: &RawParams) -> Result<SpectralParams> {
    SpectralParams::validate(raw)
}

pub fn highest_weight_multiplier(params: &SpectralParams) -> Complex64 {
    let n = params.n as i32;
    params.xs[params.p..]
        .iter()
        .zip(&params.ys[params.p..])
        .fold(Complex64::new(1.0, 0.0), |acc, (x, y)| acc * (x / y).powi(n))
}

/// Unvalidated record for unequal numerator/denominator counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawExtendedParams {
    pub p: usize,
    pub q: usize,
    pub pprime: usize,
    pub qprime: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub xs: Vec<[f64; 2]>,
    pub ys: Vec<[f64; 2]>,
}

/// Parameters with `p + q` numerator factors and `p' + q'` denominator
/// factors, restricted to `p' ≤ p + N`, `q' ≤ q + N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawExtendedParams", into = "RawExtendedParams")]
pub struct ExtendedParams {
    p: usize,
    q: usize,
    pprime: usize,
    qprime: usize,
    n: usize,
    xs: Vec<Complex64>,
    ys: Vec<Complex64>,
}

impl ExtendedParams {
    pub fn validate(raw: &RawExtendedParams) -> Result<Self> {
        Self::new(
            (raw.p, raw.q),
            (raw.pprime, raw.qprime),
            raw.n,
            to_complex(&raw.xs),
            to_complex(&raw.ys),
        )
    }

    pub fn new(
        (p, q): (usize, usize),
        (pprime, qprime): (usize, usize),
        n: usize,
        xs: Vec<Complex64>,
        ys: Vec<Complex64>,
    ) -> Result<Self> {
        if p + q + pprime + qprime == 0 {
            return Err(Error::Value("at least one factor is required".into()));
        }
        if n == 0 {
            return Err(Error::Value("N must be at least 1".into()));
        }
        if xs.len() != p + q || ys.len() != pprime + qprime {
            return Err(Error::Shape(format!(
                "expected {} xs and {} ys, got {} and {}",
                p + q,
                pprime + qprime,
                xs.len(),
                ys.len()
            )));
        }
        if pprime > p + n {
            return Err(Error::DomainViolation {
                index: pprime,
                detail: format!("p' = {pprime} exceeds p + N = {}", p + n),
            });
        }
        if qprime > q + n {
            return Err(Error::DomainViolation {
                index: pprime + qprime,
                detail: format!("q' = {qprime} exceeds q + N = {}", q + n),
            });
        }
        check_finite("xs", &xs)?;
        check_finite("ys", &ys)?;
        check_nonzero("xs", &xs)?;
        check_moduli(&ys, pprime)?;
        Ok(Self {
            p,
            q,
            pprime,
            qprime,
            n,
            xs,
            ys,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn pprime(&self) -> usize {
        self.pprime
    }

    pub fn qprime(&self) -> usize {
        self.qprime
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn xs(&self) -> &[Complex64] {
        &self.xs
    }

    pub fn ys(&self) -> &[Complex64] {
        &self.ys
    }

    pub fn to_raw(&self) -> RawExtendedParams {
        RawExtendedParams {
            p: self.p,
            q: self.q,
            pprime: self.pprime,
            qprime: self.qprime,
            n: self.n,
            xs: to_pairs(&self.xs),
            ys: to_pairs(&self.ys),
        }
    }

    pub fn with_xs(&self, xs: Vec<Complex64>) -> Result<Self> {
        Self::new(
            (self.p, self.q),
            (self.pprime, self.qprime),
            self.n,
            xs,
            self.ys.clone(),
        )
    }
}

impl TryFrom<RawExtendedParams> for ExtendedParams {
    type Error = Error;

    fn try_from(raw: RawExtendedParams) -> Result<Self> {
        Self::validate(&raw)
    }
}

impl From<ExtendedParams> for RawExtendedParams {
    fn from(p: ExtendedParams) -> Self {
        p.to_raw()
    }
}

impl From<&SpectralParams> for ExtendedParams {
    fn from(s: &SpectralParams) -> Self {
        Self {
            p: s.p,
            q: s.q,
            pprime: s.p,
            qprime: s.q,
            n: s.n,
            xs: s.xs.clone(),
            ys: s.ys.clone(),
        }
    }
}

/// One coset of `S_{p+q} / (S_p × S_q)`: which `x` indices fill the
/// `j`-slots and which fill the `l`-slots (0-based, ascending).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coset {
    pub j: Vec<usize>,
    pub l: Vec<usize>,
}

impl Coset {
    pub fn identity(p: usize, q: usize) -> Self {
        Self {
            j: (0..p).collect(),
            l: (p..p + q).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.j.iter().enumerate().all(|(i, &v)| i == v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetTable {
    pub p: usize,
    pub q: usize,
    pub cosets: Vec<Coset>,
}

impl CosetTable {
    pub fn len(&self) -> usize {
        self.cosets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cosets.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Coset> {
        self.cosets.iter()
    }
}

/// `binomial(n, k)` saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Coset representatives of `S_{p+q}/(S_p × S_q)`: the identity coset
/// first, then the others in lexicographic order of their `l` subset.
pub fn enumerate_cosets(p: usize, q: usize) -> Result<CosetTable> {
    enumerate_cosets_with_limit(p, q, DEFAULT_COSET_LIMIT)
}

pub fn enumerate_cosets_with_limit(p: usize, q: usize, limit: u128) -> Result<CosetTable> {
    if p + q == 0 {
        return Err(Error::Value("p + q must be at least 1".into()));
    }
    cosets_unchecked(p, q, limit)
}

/// Same as [`enumerate_cosets_with_limit`] but allows `p = q = 0`, which
/// yields a single empty coset.
pub(crate) fn cosets_unchecked(p: usize, q: usize, limit: u128) -> Result<CosetTable> {
    let n = p + q;
    let count = binomial(n, q);
    if count > limit {
        return Err(Error::Capacity {
            what: "cosets",
            requested: count,
            limit,
        });
    }
    let identity = Coset::identity(p, q);
    let mut cosets = Vec::with_capacity(count as usize);
    cosets.push(identity.clone());

    let mut l: Vec<usize> = (0..q).collect();
    loop {
        if l != identity.l {
            let j = (0..n).filter(|i| !l.contains(i)).collect();
            cosets.push(Coset { j, l: l.clone() });
        }
        // advance to the next q-subset in lexicographic order
        let mut i = q;
        loop {
            if i == 0 {
                return Ok(CosetTable { p, q, cosets });
            }
            i -= 1;
            if l[i] < n - q + i {
                break;
            }
        }
        l[i] += 1;
        for t in i + 1..q {
            l[t] = l[t - 1] + 1;
        }
    }
}

/// A weight `γ = Σ_k (i m_k ψ_k − n_k φ_k)` recorded by its integer exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Weight {
    pub m: Vec<i64>,
    pub n: Vec<i64>,
}

impl Weight {
    /// `λ_N`: `m = n = (0,…,0,N,…,N)` with `q` trailing entries.
    pub fn highest(p: usize, q: usize, dim: usize) -> Self {
        let v: Vec<i64> = (0..p + q).map(|k| if k < p { 0 } else { dim as i64 }).collect();
        Self { m: v.clone(), n: v }
    }

    /// Whether `n_j ≤ 0 ≤ m_k ≤ N ≤ n_l` holds for `j ≤ p < l`.
    pub fn is_admissible(&self, p: usize, dim: usize) -> bool {
        let dim = dim as i64;
        self.m.len() == self.n.len()
            && self.m.iter().all(|&m| (0..=dim).contains(&m))
            && self
                .n
                .iter()
                .enumerate()
                .all(|(k, &n)| if k < p { n <= 0 } else { n >= dim })
    }

    /// `e^{γ} = ∏ x_k^{m_k} y_k^{−n_k}`.
    pub fn exp_at(&self, xs: &[Complex64], ys: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (x, &m) in xs.iter().zip(&self.m) {
            acc *= x.powi(m as i32);
        }
        for (y, &n) in ys.iter().zip(&self.n) {
            acc *= y.powi(-n as i32);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn raw(p: usize, q: usize, n: usize, xs: &[f64], ys: &[f64]) -> RawParams {
        RawParams {
            p,
            q,
            n,
            xs: xs.iter().map(|&v| [v, 0.0]).collect(),
            ys: ys.iter().map(|&v| [v, 0.0]).collect(),
        }
    }

    #[test]
    fn validate_examples() {
        assert!(validate(&raw(1, 1, 1, &[2.0, 3.0], &[0.5, 4.0])).is_ok());
        match validate(&raw(1, 1, 1, &[2.0, 3.0], &[1.5, 4.0])) {
            Err(Error::DomainViolation { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(validate(&raw(1, 0, 2, &[0.3], &[0.5])).is_ok());
    }

    #[test]
    fn validate_errors() {
        assert!(matches!(
            validate(&raw(1, 1, 1, &[2.0], &[0.5, 4.0])),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            validate(&raw(1, 1, 0, &[2.0, 3.0], &[0.5, 4.0])),
            Err(Error::Value(_))
        ));
        assert!(matches!(
            validate(&raw(1, 1, 1, &[0.0, 3.0], &[0.5, 4.0])),
            Err(Error::Value(_))
        ));
        match validate(&raw(1, 1, 1, &[2.0, 3.0], &[0.5, 1.0])) {
            Err(Error::DomainViolation { index, .. }) => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_is_idempotent() {
        let p = validate(&raw(2, 1, 3, &[0.2, -1.0, 3.0], &[0.5, -0.1, 4.0])).unwrap();
        assert_eq!(validate(&p.to_raw()).unwrap(), p);
    }

    #[test]
    fn multiplier_examples() {
        let p = validate(&raw(1, 1, 1, &[2.0, 3.0], &[0.5, 4.0])).unwrap();
        assert_eq!(p.highest_weight_multiplier(), c(0.75));
        let p = p.with_dim(2).unwrap();
        assert_eq!(p.highest_weight_multiplier(), c(9.0 / 16.0));
        let p = validate(&raw(1, 0, 2, &[0.3], &[0.5])).unwrap();
        assert_eq!(p.highest_weight_multiplier(), c(1.0));
        let p = validate(&raw(1, 2, 4, &[0.3, 2.0, -3.0], &[0.5, 2.0, -3.0])).unwrap();
        assert_eq!(p.highest_weight_multiplier(), c(1.0));
    }

    #[test]
    fn coset_examples() {
        let t = enumerate_cosets(1, 1).unwrap();
        assert_eq!(
            t.cosets,
            vec![Coset { j: vec![0], l: vec![1] }, Coset { j: vec![1], l: vec![0] },]
        );
        assert_eq!(enumerate_cosets(2, 1).unwrap().len(), 3);
        assert_eq!(enumerate_cosets(2, 2).unwrap().len(), 6);
        assert_eq!(enumerate_cosets(3, 0).unwrap().len(), 1);
        assert_eq!(enumerate_cosets(0, 3).unwrap().len(), 1);
    }

    #[test]
    fn coset_table_properties() {
        for p in 0..5 {
            for q in 0..5 {
                if p + q == 0 {
                    continue;
                }
                let t = enumerate_cosets(p, q).unwrap();
                assert_eq!(t.len() as u128, binomial(p + q, q));
                assert!(t.cosets[0].is_identity());
                let set: std::collections::HashSet<_> = t.cosets.iter().cloned().collect();
                assert_eq!(set.len(), t.len());
                for c in &t.cosets {
                    assert_eq!(c.j.len(), p);
                    assert_eq!(c.l.len(), q);
                    let mut all: Vec<_> = c.j.iter().chain(&c.l).copied().collect();
                    all.sort_unstable();
                    assert_eq!(all, (0..p + q).collect::<Vec<_>>());
                }
                // non-identity entries are lexicographic in l
                let rest: Vec<_> = t.cosets[1..].iter().map(|c| c.l.clone()).collect();
                let mut sorted = rest.clone();
                sorted.sort();
                assert_eq!(rest, sorted);
            }
        }
    }

    #[test]
    fn coset_capacity() {
        assert!(matches!(
            enumerate_cosets_with_limit(10, 10, 1000),
            Err(Error::Capacity { .. })
        ));
        assert!(enumerate_cosets(0, 0).is_err());
        assert_eq!(cosets_unchecked(0, 0, 10).unwrap().len(), 1);
    }

    #[test]
    fn extended_bounds() {
        let ok = ExtendedParams::new((0, 0), (1, 1), 3, vec![], vec![c(0.5), c(2.0)]);
        assert!(ok.is_ok());
        let bad = ExtendedParams::new((0, 0), (2, 0), 1, vec![], vec![c(0.5), c(0.2)]);
        assert!(matches!(bad, Err(Error::DomainViolation { .. })));
        let bad = ExtendedParams::new((0, 1), (0, 3), 1, vec![c(2.0)], vec![c(2.0); 3]);
        assert!(matches!(bad, Err(Error::DomainViolation { .. })));
    }

    #[test]
    fn json_shape() {
        let p = validate(&raw(1, 1, 1, &[2.0, 3.0], &[0.5, 4.0])).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"p":1,"q":1,"N":1,"xs":[[2.0,0.0],[3.0,0.0]],"ys":[[0.5,0.0],[4.0,0.0]]}"#
        );
        let back: SpectralParams = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"p":1,"q":1,"N":1,"xs":[[2,0],[3,0]],"ys":[[1.5,0],[4,0]]}"#;
        assert!(serde_json::from_str::<SpectralParams>(bad).is_err());
    }

    #[test]
    fn weights() {
        let w = Weight::highest(2, 1, 3);
        assert_eq!(w.m, vec![0, 0, 3]);
        assert!(w.is_admissible(2, 3));
        let bad = Weight {
            m: vec![0, 4, 3],
            n: vec![0, 0, 3],
        };
        assert!(!bad.is_admissible(2, 3));
        let bad = Weight {
            m: vec![0, 1, 3],
            n: vec![1, 0, 3],
        };
        assert!(!bad.is_admissible(2, 3));
    }
}
