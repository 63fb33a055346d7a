//! Closed-form evaluation of the character χ as a sum over cosets, plus the
//! unequal-count generalization and the compact and stable limits.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::ddouble::DdComplex;
use crate::error::{Error, Result};
use crate::params::{cosets_unchecked, Coset, ExtendedParams, SpectralParams, DEFAULT_COSET_LIMIT};
use crate::scalar::Scalar;
use crate::summation::CompensatedSum;

/// Coset counts above this are evaluated in parallel.
const PARALLEL_THRESHOLD: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Direct,
    ConfluentExtrapolated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfluentInfo {
    /// Largest perturbation step, relative to the cluster leader.
    pub epsilon: f64,
    /// Disagreement between the averaged evaluations at the two steps.
    pub residual: f64,
    /// Clustered index groups (0-based).
    pub clusters: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult {
    pub value: Complex64,
    pub method: Method,
    /// `max|term| / |sum|`, at least 1.
    pub condition: f64,
    pub extended_precision: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<Complex64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub confluent: Option<ConfluentInfo>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalOptions {
    /// Pairs with `|1 − x_a/x_b|` below this are treated as coincident.
    pub cluster_tol: f64,
    /// Route clustered inputs through extrapolation instead of failing.
    pub confluent: bool,
    /// Relative perturbation step for extrapolation.
    pub step: f64,
    /// Re-evaluate in double-double when the condition exceeds `extended_threshold`.
    pub extended_precision: bool,
    pub extended_threshold: f64,
    pub keep_terms: bool,
    pub coset_limit: u128,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            cluster_tol: 1e-6,
            confluent: true,
            step: 1e-2,
            extended_precision: false,
            extended_threshold: 1e8,
            keep_terms: false,
            coset_limit: DEFAULT_COSET_LIMIT,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Thm1 { p: usize, q: usize },
    Cor12 { p: usize, q: usize, pp: usize, qp: usize },
    Compact { p: usize, q: usize },
}

impl Kind {
    fn slots(self) -> (usize, usize) {
        match self {
            Kind::Thm1 { p, q } | Kind::Cor12 { p, q, .. } | Kind::Compact { p, q } => (p, q),
        }
    }
}

fn one<S: Scalar>(like: &S) -> S {
    like.one_like()
}

fn checked_div<S: Scalar>(num: S, den: S, what: &str) -> Result<S> {
    if den.magnitude() == 0.0 {
        return Err(Error::SingularInput(format!("vanishing denominator {what}")));
    }
    Ok(num / den)
}

/// One coset term. `xs`/`ys` are in original order; only the x's move.
fn term<S: Scalar>(kind: Kind, n: u32, c: &Coset, xs: &[S], ys: &[S]) -> Result<S> {
    let unit = one(xs.first().or(ys.first()).expect("at least one parameter"));
    match kind {
        Kind::Thm1 { p, q } => {
            let mut acc = unit.clone();
            for (b, &l) in c.l.iter().enumerate() {
                let r = checked_div(xs[l].clone(), ys[p + b].clone(), "y_l")?;
                acc = acc * r.powu(n);
            }
            for (a, &j) in c.j.iter().enumerate() {
                for (b, &l) in c.l.iter().enumerate() {
                    let yl = ys[p + b].clone();
                    let num =
                        (unit.clone() - ys[a].clone() / xs[l].clone()) * (unit.clone() - xs[j].clone() / yl.clone());
                    let den = (unit.clone() - xs[j].clone() / xs[l].clone()) * (unit.clone() - ys[a].clone() / yl);
                    acc = acc * checked_div(num, den, "1 - x_j/x_l")?;
                }
            }
            debug_assert_eq!(c.l.len(), q);
            Ok(acc)
        }
        Kind::Cor12 { p, q: _, pp, qp } => {
            let mut acc = unit.clone();
            for (b, &l) in c.l.iter().enumerate() {
                let r = checked_div(xs[l].clone(), xs[p + b].clone(), "x_l")?;
                acc = acc * r.powu(n);
            }
            let mut num = unit.clone();
            let mut den = unit.clone();
            for yj in &ys[..pp] {
                for &l in &c.l {
                    num = num * (unit.clone() - yj.clone() / xs[l].clone());
                }
            }
            for &j in &c.j {
                for yl in &ys[pp..pp + qp] {
                    num = num * (unit.clone() - xs[j].clone() / yl.clone());
                }
            }
            for &j in &c.j {
                for &l in &c.l {
                    den = den * (unit.clone() - xs[j].clone() / xs[l].clone());
                }
            }
            for yj in &ys[..pp] {
                for yl in &ys[pp..pp + qp] {
                    den = den * (unit.clone() - yj.clone() / yl.clone());
                }
            }
            Ok(acc * checked_div(num, den, "1 - x_j/x_l")?)
        }
        Kind::Compact { .. } => {
            let mut acc = unit.clone();
            for &l in &c.l {
                acc = acc * xs[l].powu(n);
            }
            let mut den = unit.clone();
            for &j in &c.j {
                for &l in &c.l {
                    den = den * (unit.clone() - xs[j].clone() / xs[l].clone());
                }
            }
            checked_div(acc, den, "1 - x_j/x_l")
        }
    }
}

struct Problem<'a> {
    kind: Kind,
    n: u32,
    xs: &'a [Complex64],
    ys: &'a [Complex64],
}

fn dim_u32(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Value(format!("N = {n} is too large")))
}

fn direct(prob: &Problem, xs: &[Complex64], cosets: &[Coset], opts: &EvalOptions) -> Result<EvalResult> {
    let eval = |c: &Coset| term(prob.kind, prob.n, c, xs, prob.ys);
    // collect in coset order so the reduction is independent of threading
    let terms: Vec<Complex64> = if cosets.len() > PARALLEL_THRESHOLD {
        cosets.par_iter().map(eval).collect::<Result<_>>()?
    } else {
        cosets.iter().map(eval).collect::<Result<_>>()?
    };
    let sum: CompensatedSum = terms.iter().copied().collect();
    let mut value = sum.total();
    let condition = sum.condition();
    let mut extended = false;
    if opts.extended_precision && condition > opts.extended_threshold {
        let dx: Vec<DdComplex> = xs.iter().map(|&v| DdComplex::from_c64(v)).collect();
        let dy: Vec<DdComplex> = prob.ys.iter().map(|&v| DdComplex::from_c64(v)).collect();
        let mut acc = DdComplex::default();
        for c in cosets {
            acc = acc + term(prob.kind, prob.n, c, &dx, &dy)?;
        }
        value = acc.to_c64();
        extended = true;
    }
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::SingularInput("coset sum is not finite".into()));
    }
    Ok(EvalResult {
        value,
        method: Method::Direct,
        condition,
        extended_precision: extended,
        terms: opts.keep_terms.then_some(terms),
        confluent: None,
    })
}

/// Groups indices whose x's satisfy `|1 − x_a/x_b| < tol`, transitively.
pub fn find_clusters(xs: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let n = xs.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for a in 0..n {
        for b in a + 1..n {
            let close = (1.0 - xs[a] / xs[b]).norm() < tol || (1.0 - xs[b] / xs[a]).norm() < tol;
            if close {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = root(&mut parent, i);
        groups[r].push(i);
    }
    groups.into_iter().filter(|g| g.len() > 1).collect()
}

fn perturbed(xs: &[Complex64], clusters: &[Vec<usize>], h: Complex64) -> Vec<Complex64> {
    let mut out = xs.to_vec();
    for g in clusters {
        let dir = Complex64::i() * xs[g[0]] * h;
        for (k, &m) in g.iter().enumerate() {
            out[m] = xs[m] + dir * k as f64;
        }
    }
    out
}

/// Number of rotated copies of each step averaged before extrapolating.
const DIRECTIONS: usize = 4;

fn extrapolate(prob: &Problem, cosets: &[Coset], clusters: Vec<Vec<usize>>, opts: &EvalOptions) -> Result<EvalResult> {
    let eps = opts.step;
    let plain = EvalOptions {
        keep_terms: false,
        ..opts.clone()
    };
    let mut condition: f64 = 1.0;
    let mut extended = false;
    // Averaging over h·i^k cancels every power of h not divisible by 4, so
    // g(h) = f(0) + O(h^4) and the Richardson step below is exact to O(h^8).
    let mut g = |h: f64| -> Result<Complex64> {
        let mut acc = CompensatedSum::new();
        let mut w = Complex64::new(h, 0.0);
        for _ in 0..DIRECTIONS {
            let r = direct(prob, &perturbed(prob.xs, &clusters, w), cosets, &plain)?;
            condition = condition.max(r.condition);
            extended |= r.extended_precision;
            acc.add(r.value);
            w *= Complex64::i();
        }
        Ok(acc.total() / DIRECTIONS as f64)
    };
    let g1 = g(eps)?;
    let g2 = g(eps / 2.0)?;
    let scale = 2f64.powi(DIRECTIONS as i32);
    let value = (g2 * scale - g1) / (scale - 1.0);
    let residual = (g2 - g1).norm();
    let bound = 1e3 * opts.cluster_tol * value.norm().max(1.0);
    if !residual.is_finite() || residual > bound {
        return Err(Error::ExtrapolationUnstable { residual, bound });
    }
    Ok(EvalResult {
        value,
        method: Method::ConfluentExtrapolated,
        condition,
        extended_precision: extended,
        terms: None,
        confluent: Some(ConfluentInfo {
            epsilon: eps,
            residual,
            clusters,
        }),
    })
}

fn evaluate(prob: &Problem, opts: &EvalOptions) -> Result<EvalResult> {
    let (p, q) = prob.kind.slots();
    let table = cosets_unchecked(p, q, opts.coset_limit)?;
    let clusters = if p > 0 && q > 0 {
        find_clusters(prob.xs, opts.cluster_tol)
    } else {
        Vec::new()
    };
    if !clusters.is_empty() && opts.confluent {
        return extrapolate(prob, &table.cosets, clusters, opts);
    }
    direct(prob, prob.xs, &table.cosets, opts)
}

/// χ for validated parameters, with default options.
pub fn eval_thm1(params: &SpectralParams) -> Result<EvalResult> {
    eval_thm1_with(params, &EvalOptions::default())
}

pub fn eval_thm1_with(params: &SpectralParams, opts: &EvalOptions) -> Result<EvalResult> {
    let prob = Problem {
        kind: Kind::Thm1 {
            p: params.p(),
            q: params.q(),
        },
        n: dim_u32(params.dim())?,
        xs: params.xs(),
        ys: params.ys(),
    };
    evaluate(&prob, opts)
}

/// Forces the extrapolation path with the given cluster tolerance. Inputs
/// without clusters are evaluated directly.
pub fn eval_confluent(params: &SpectralParams, tol: f64) -> Result<EvalResult> {
    let opts = EvalOptions {
        cluster_tol: tol,
        confluent: true,
        ..EvalOptions::default()
    };
    eval_thm1_with(params, &opts)
}

pub fn eval_cor12(params: &ExtendedParams) -> Result<EvalResult> {
    eval_cor12_with(params, &EvalOptions::default())
}

pub fn eval_cor12_with(params: &ExtendedParams, opts: &EvalOptions) -> Result<EvalResult> {
    let prob = Problem {
        kind: Kind::Cor12 {
            p: params.p(),
            q: params.q(),
            pp: params.pprime(),
            qp: params.qprime(),
        },
        n: dim_u32(params.dim())?,
        xs: params.xs(),
        ys: params.ys(),
    };
    if params.xs().is_empty() && params.ys().is_empty() {
        return Err(Error::Value("at least one factor is required".into()));
    }
    evaluate(&prob, opts)
}

fn check_compact_inputs(p: usize, q: usize, n: usize, xs: &[Complex64]) -> Result<()> {
    if p + q == 0 {
        return Err(Error::Value("p + q must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::Value("N must be at least 1".into()));
    }
    if xs.len() != p + q {
        return Err(Error::Shape(format!("expected {} xs, got {}", p + q, xs.len())));
    }
    for (i, x) in xs.iter().enumerate() {
        if !x.re.is_finite() || !x.im.is_finite() || x.norm_sqr() == 0.0 {
            return Err(Error::Value(format!("xs[{}] must be finite and nonzero", i + 1)));
        }
    }
    Ok(())
}

/// The limit with every y removed: `Σ ∏ x_l^N ∏ 1/(1 − x_j/x_l)`.
pub fn eval_compact(p: usize, q: usize, n: usize, xs: &[Complex64]) -> Result<EvalResult> {
    eval_compact_with(p, q, n, xs, &EvalOptions::default())
}

pub fn eval_compact_with(p: usize, q: usize, n: usize, xs: &[Complex64], opts: &EvalOptions) -> Result<EvalResult> {
    check_compact_inputs(p, q, n, xs)?;
    let prob = Problem {
        kind: Kind::Compact { p, q },
        n: dim_u32(n)?,
        xs,
        ys: &[],
    };
    evaluate(&prob, opts)
}

/// `∏_{l>p} y_l^{−N} ∏ 1/(1 − y_j/y_l)`, valid for `N ≥ max(p, q)`.
pub fn eval_stable(p: usize, q: usize, n: usize, ys: &[Complex64]) -> Result<EvalResult> {
    // reuse the full validator: ys double as (nonzero) xs
    let params = SpectralParams::new(p, q, n, ys.to_vec(), ys.to_vec())?;
    if n < p.max(q) {
        return Err(Error::DomainViolation {
            index: n,
            detail: format!("N = {n} is below max(p, q) = {}", p.max(q)),
        });
    }
    let ys = params.ys();
    let n = dim_u32(n)?;
    let mut value = Complex64::new(1.0, 0.0);
    for yl in &ys[p..] {
        value /= yl.powu(n);
    }
    for yj in &ys[..p] {
        for yl in &ys[p..] {
            value /= 1.0 - yj / yl;
        }
    }
    Ok(EvalResult {
        value,
        method: Method::Direct,
        condition: 1.0,
        extended_precision: false,
        terms: None,
        confluent: None,
    })
}

/// The coset sum over any [`Scalar`], without diagnostics or confluent
/// handling. Used to lift χ to jets.
pub fn thm1_generic<S: Scalar>(p: usize, q: usize, n: usize, xs: &[S], ys: &[S]) -> Result<S> {
    if xs.len() != p + q || ys.len() != p + q || p + q == 0 {
        return Err(Error::Shape(format!(
            "expected {} xs and ys, got {} and {}",
            p + q,
            xs.len(),
            ys.len()
        )));
    }
    let table = cosets_unchecked(p, q, DEFAULT_COSET_LIMIT)?;
    let kind = Kind::Thm1 { p, q };
    let n = dim_u32(n)?;
    let mut acc = term(kind, n, &table.cosets[0], xs, ys)?;
    for c in &table.cosets[1..] {
        acc = acc + term(kind, n, c, xs, ys)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::highest_weight_multiplier;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn cv(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| c(x)).collect()
    }

    fn params(p: usize, q: usize, n: usize, xs: &[f64], ys: &[f64]) -> SpectralParams {
        SpectralParams::new(p, q, n, cv(xs), cv(ys)).unwrap()
    }

    /// Residue evaluation of the N = 1 average: the integrand is a rational
    /// function of one unit-circle variable, and only the poles at
    /// `z = y_l` (|y_l| > 1) sit outside the contour.
    fn residue_oracle_n1(xs: &[Complex64], ys: &[Complex64], p: usize) -> Complex64 {
        let mut chi = c(1.0);
        for l in p..ys.len() {
            let mut num = c(1.0);
            for x in xs {
                num *= 1.0 - x / ys[l];
            }
            let mut den = c(1.0);
            for (k, y) in ys.iter().enumerate() {
                if k != l {
                    den *= 1.0 - y / ys[l];
                }
            }
            chi -= num / den;
        }
        chi
    }

    #[test]
    fn golden_value_and_terms() {
        let prm = params(1, 1, 1, &[2.0, 3.0], &[0.5, 4.0]);
        let opts = EvalOptions {
            keep_terms: true,
            ..Default::default()
        };
        let r = eval_thm1_with(&prm, &opts).unwrap();
        assert!((r.value - c(6.0 / 7.0)).norm() < 1e-15);
        let t = r.terms.unwrap();
        assert!((t[0] - c(15.0 / 14.0)).norm() < 1e-15);
        assert!((t[1] - c(-3.0 / 14.0)).norm() < 1e-15);
        assert_eq!(r.method, Method::Direct);
        assert!(r.condition >= 1.0);
        let oracle = residue_oracle_n1(prm.xs(), prm.ys(), 1);
        assert!((r.value - oracle).norm() < 1e-14);
    }

    #[test]
    fn matches_residue_oracle_at_n1() {
        let cases: &[(usize, usize, &[f64], &[f64])] = &[
            (2, 1, &[0.7, -1.3, 2.1], &[0.4, -0.6, 2.5]),
            (1, 2, &[1.1, 0.3, -0.8], &[0.2, 1.9, -3.0]),
            (2, 2, &[0.9, 1.4, -0.5, 2.2], &[0.3, -0.5, 1.5, 2.7]),
        ];
        for &(p, q, xs, ys) in cases {
            let prm = params(p, q, 1, xs, ys);
            let v = eval_thm1(&prm).unwrap().value;
            let o = residue_oracle_n1(prm.xs(), prm.ys(), p);
            assert!((v - o).norm() < 1e-12, "{p},{q}: {v} vs {o}");
        }
    }

    #[test]
    fn trivial_identity() {
        let v = [0.3, -0.2, 1.7, -2.5];
        for n in 1..5 {
            let prm = params(2, 2, n, &v, &v);
            let r = eval_thm1(&prm).unwrap();
            assert!((r.value - c(1.0)).norm() < 1e-12, "N={n}: {}", r.value);
        }
    }

    #[test]
    fn compact_limit_example() {
        // multiply out the highest-weight y-factor before comparing
        let prm = params(1, 1, 1, &[2.0, 3.0], &[1e-8, 1e8]);
        let v = eval_thm1(&prm).unwrap().value * 1e8;
        assert!((v - c(5.0)).norm() < 1e-6, "{v}");
    }

    #[test]
    fn compact_examples() {
        let v = eval_compact(1, 1, 1, &cv(&[0.3, 0.7])).unwrap();
        assert!((v.value - c(1.0)).norm() < 1e-12);
        let v = eval_compact(1, 1, 2, &cv(&[0.3, 0.7])).unwrap();
        assert!((v.value - c(0.79)).norm() < 1e-12);
        let v = eval_compact(1, 1, 2, &cv(&[0.3, 0.3 + 1e-9])).unwrap();
        assert_eq!(v.method, Method::ConfluentExtrapolated);
        assert!((v.value - c(0.27)).norm() < 1e-5);
        let v = eval_compact(1, 1, 2, &cv(&[0.3, 0.3])).unwrap();
        assert!((v.value - c(0.27)).norm() < 1e-6);
    }

    #[test]
    fn singular_without_confluent_mode() {
        let opts = EvalOptions {
            confluent: false,
            ..Default::default()
        };
        let r = eval_compact_with(1, 1, 2, &cv(&[0.3, 0.3]), &opts);
        assert!(matches!(r, Err(Error::SingularInput(_))));
        let prm = params(1, 1, 1, &[2.0, 2.0], &[0.5, 4.0]);
        assert!(matches!(eval_thm1_with(&prm, &opts), Err(Error::SingularInput(_))));
    }

    #[test]
    fn confluent_thm1_matches_residue_oracle() {
        let prm = params(1, 1, 1, &[2.0, 2.0], &[0.5, 4.0]);
        let r = eval_thm1(&prm).unwrap();
        assert_eq!(r.method, Method::ConfluentExtrapolated);
        let o = residue_oracle_n1(prm.xs(), prm.ys(), 1);
        assert!((r.value - o).norm() < 1e-8, "{} vs {o}", r.value);
        let info = r.confluent.unwrap();
        assert_eq!(info.clusters, vec![vec![0, 1]]);
    }

    #[test]
    fn confluent_passthrough() {
        let prm = params(1, 1, 1, &[2.0, 3.0], &[0.5, 4.0]);
        let a = eval_confluent(&prm, 1e-6).unwrap();
        let b = eval_thm1(&prm).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.method, Method::Direct);
    }

    #[test]
    fn triple_cluster() {
        let a = 0.6;
        let v = eval_compact(1, 2, 2, &cv(&[a, a, a])).unwrap();
        assert_eq!(v.confluent.as_ref().unwrap().clusters, vec![vec![0, 1, 2]]);
        let near = eval_compact_with(
            1,
            2,
            2,
            &[
                c(a),
                c(a) * Complex64::new(1.0, 1e-3),
                c(a) * Complex64::new(1.0, -1e-3),
            ],
            &EvalOptions {
                confluent: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((v.value - near.value).norm() < 1e-4, "{} vs {}", v.value, near.value);
    }

    #[test]
    fn cor12_examples() {
        let e = ExtendedParams::new((1, 0), (0, 0), 3, vec![c(0.4)], vec![]).unwrap();
        assert!((eval_cor12(&e).unwrap().value - c(1.0)).norm() < 1e-15);
        let e = ExtendedParams::new((0, 0), (1, 0), 2, vec![], vec![c(0.5)]).unwrap();
        assert!((eval_cor12(&e).unwrap().value - c(1.0)).norm() < 1e-15);
        // geometric series Σ (y1/y2)^k = 1/(1 − 1/4)
        let e = ExtendedParams::new((0, 0), (1, 1), 3, vec![], cv(&[0.5, 2.0])).unwrap();
        assert!((eval_cor12(&e).unwrap().value - c(4.0 / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn cor12_reduces_to_thm1() {
        let prm = params(2, 1, 2, &[0.7, -1.3, 2.1], &[0.4, -0.6, 2.5]);
        let t = eval_thm1(&prm).unwrap().value / highest_weight_multiplier(&prm);
        let e = eval_cor12(&ExtendedParams::from(&prm)).unwrap().value;
        assert!((t - e).norm() / t.norm() < 1e-12);
    }

    #[test]
    fn stable_examples() {
        let v = eval_stable(1, 1, 3, &cv(&[0.5, 2.0])).unwrap().value;
        assert!((v - c(1.0 / 6.0)).norm() < 1e-15);
        let v = eval_stable(2, 1, 2, &cv(&[0.3, 0.5, 2.0])).unwrap().value;
        assert!((v - c(0.25 / (0.85 * 0.75))).norm() < 1e-15);
        let v = eval_stable(1, 1, 2, &cv(&[1e-12, 2.0])).unwrap().value;
        assert!((v - c(0.25)).norm() < 1e-12);
        assert!(matches!(
            eval_stable(2, 1, 1, &cv(&[0.3, 0.5, 2.0])),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn stable_limit_of_thm1() {
        let prm = params(1, 1, 3, &[1e-8, 1e8], &[0.5, 2.0]);
        let v = eval_thm1(&prm).unwrap().value / c(1e8).powu(3);
        assert!((v - c(1.0 / 6.0)).norm() < 1e-6, "{v}");
    }

    #[test]
    fn extended_precision_agrees() {
        let prm = params(2, 2, 3, &[0.9, 1.4, -0.5, 2.2], &[0.3, -0.5, 1.5, 2.7]);
        let opts = EvalOptions {
            extended_precision: true,
            extended_threshold: 0.0,
            ..Default::default()
        };
        let a = eval_thm1_with(&prm, &opts).unwrap();
        assert!(a.extended_precision);
        let b = eval_thm1(&prm).unwrap();
        assert!((a.value - b.value).norm() < 1e-12 * a.value.norm().max(1.0));
    }

    #[test]
    fn generic_matches_direct() {
        let prm = params(2, 1, 2, &[0.7, -1.3, 2.1], &[0.4, -0.6, 2.5]);
        let g = thm1_generic(2, 1, 2, prm.xs(), prm.ys()).unwrap();
        assert!((g - eval_thm1(&prm).unwrap().value).norm() < 1e-13);
    }

    #[test]
    fn clusters_are_transitive() {
        let xs = [c(1.0), c(2.0), c(1.0 + 5e-7), c(1.0 + 1e-6), c(2.0)];
        assert_eq!(find_clusters(&xs, 1e-6), vec![vec![0, 2, 3], vec![1, 4]]);
        assert!(find_clusters(&cv(&[1.0, 2.0]), 1e-6).is_empty());
    }

    fn arb_point(p: usize, q: usize) -> impl Strategy<Value = (Vec<Complex64>, Vec<Complex64>)> {
        let polar =
            |r: std::ops::Range<f64>| (r, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t));
        let xs = proptest::collection::vec(polar(0.5..1.6), p + q);
        let yj = proptest::collection::vec(polar(0.2..0.6), p);
        let yl = proptest::collection::vec(polar(1.7..4.0), q);
        (xs, yj, yl).prop_map(|(xs, mut yj, yl)| {
            yj.extend(yl);
            (xs, yj)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn weyl_invariance((xs, ys) in arb_point(2, 2), n in 1usize..4, rot in 1usize..4) {
            let base = SpectralParams::new(2, 2, n, xs.clone(), ys.clone()).unwrap();
            let v = eval_thm1(&base).unwrap().value;
            let mut px = xs.clone();
            px.rotate_left(rot);
            let mut py = ys.clone();
            py.swap(0, 1);
            py.swap(2, 3);
            let w = eval_thm1(&SpectralParams::new(2, 2, n, px, py).unwrap()).unwrap().value;
            prop_assert!((v - w).norm() <= 1e-10 * v.norm().max(1e-300));
        }

        #[test]
        fn x_equals_y_gives_one((xs, ys) in arb_point(2, 1), n in 1usize..6) {
            let _ = xs;
            let prm = SpectralParams::new(2, 1, n, ys.clone(), ys).unwrap();
            prop_assert!((eval_thm1(&prm).unwrap().value - c(1.0)).norm() < 1e-12);
        }

        #[test]
        fn residue_agreement_n1((xs, ys) in arb_point(1, 2)) {
            let prm = SpectralParams::new(1, 2, 1, xs, ys).unwrap();
            let v = eval_thm1(&prm).unwrap().value;
            let o = residue_oracle_n1(prm.xs(), prm.ys(), 1);
            prop_assert!((v - o).norm() < 1e-10 * o.norm().max(1.0));
        }
    }
}
