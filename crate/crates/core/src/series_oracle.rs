//! Torus-average oracle for χ.
//!
//! The Haar average of a class function on U(N) is an average over the
//! eigenvalue torus against `|Δ(z)|²/N!`. Each denominator factor is
//! replaced by a truncated geometric series, every eigenvariable gets the
//! same Laurent polynomial `f(z) = Σ f̂_m z^m`, and expanding both
//! Vandermonde factors as signed permutation sums leaves
//!
//! ```text
//! χ ≈ (1/N!) Σ_{σ,τ} sgn σ · sgn τ · ∏_a f̂_{τ(a) − σ(a)}
//! ```
//!
//! with exponents tracked as exact integers.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ExtendedParams, SpectralParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    /// Highest power kept in each geometric series.
    pub order: usize,
    /// Fail with `TruncationTooCoarse` when the tail bound exceeds this.
    pub tolerance: Option<f64>,
}

impl TruncationPolicy {
    pub fn new(order: usize) -> Self {
        Self { order, tolerance: None }
    }

    pub fn with_tolerance(order: usize, tolerance: f64) -> Self {
        Self {
            order,
            tolerance: Some(tolerance),
        }
    }
}

/// Largest shape the oracle accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capacity {
    pub max_p: usize,
    pub max_q: usize,
    pub max_n: usize,
}

impl Default for Capacity {
    fn default() -> Self {
        Self {
            max_p: 2,
            max_q: 2,
            max_n: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesResult {
    pub value: Complex64,
    /// Guaranteed bound on `|χ − value|` from truncating the series.
    pub tail_bound: f64,
    pub order: usize,
}

/// One eigenvariable's integrand
/// `mult · ∏(1 − a z) ∏(1 − b/z) / (∏(1 − c z) ∏(1 − d/z))`.
struct Integrand {
    mult: Complex64,
    num_pos: Vec<Complex64>,
    num_neg: Vec<Complex64>,
    den_pos: Vec<Complex64>,
    den_neg: Vec<Complex64>,
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// `∏(1 − r w)` times the truncated `∏ 1/(1 − s w)`, as coefficients in `w`.
fn one_sided(num: &[Complex64], den: &[Complex64], order: usize) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(1.0, 0.0)];
    for r in num {
        acc = poly_mul(&acc, &[Complex64::new(1.0, 0.0), -r]);
    }
    for s in den {
        let geo: Vec<Complex64> = std::iter::successors(Some(Complex64::new(1.0, 0.0)), |v| Some(v * s))
            .take(order + 1)
            .collect();
        acc = poly_mul(&acc, &geo);
    }
    acc
}

impl Integrand {
    /// Laurent coefficients `f̂_m` for `|m| < n`.
    fn coefficients(&self, n: usize, order: usize) -> Vec<Complex64> {
        let pos = one_sided(&self.num_pos, &self.den_pos, order);
        let neg = one_sided(&self.num_neg, &self.den_neg, order);
        let span = n as i64 - 1;
        (-span..=span)
            .map(|m| {
                // f̂_m = Σ_{a − b = m} pos_a · neg_b
                let mut s = Complex64::new(0.0, 0.0);
                for (b, nb) in neg.iter().enumerate() {
                    let a = m + b as i64;
                    if a >= 0 && (a as usize) < pos.len() {
                        s += pos[a as usize] * nb;
                    }
                }
                s * self.mult
            })
            .collect()
    }

    /// Bound on the sup-norm error over the torus of `∏_a f(z_a)`.
    fn tail_bound(&self, n: usize, order: usize) -> f64 {
        let num: f64 = self
            .num_pos
            .iter()
            .chain(&self.num_neg)
            .map(|v| 1.0 + v.norm())
            .product();
        // ∏(G + E) − ∏G = ∏G · (∏(1 + E/G) − 1); E/G = r^{order+1}
        let mut log_g = 0.0;
        let mut log_rel = 0.0;
        for r in self.den_pos.iter().chain(&self.den_neg).map(|v| v.norm()) {
            log_g -= (1.0 - r).ln();
            log_rel += r.powi(order as i32 + 1).ln_1p();
        }
        let n = n as f64;
        self.mult.norm() * num.powf(n) * (log_g * n).exp() * (log_rel * n).exp_m1()
    }
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn go(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if rest.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            // removing the i-th remaining element costs i transpositions
            go(prefix, rest, if i % 2 == 0 { sign } else { -sign }, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n).collect(), 1.0, &mut out);
    out
}

fn average(f: &Integrand, n: usize, policy: &TruncationPolicy) -> Result<SeriesResult> {
    if policy.order < n {
        return Err(Error::Value(format!(
            "truncation order {} must be at least N = {n}",
            policy.order
        )));
    }
    let tail_bound = f.tail_bound(n, policy.order);
    if let Some(tol) = policy.tolerance {
        if tail_bound.is_nan() || tail_bound > tol {
            return Err(Error::TruncationTooCoarse {
                bound: tail_bound,
                tolerance: tol,
            });
        }
    }
    let coef = f.coefficients(n, policy.order);
    let at = |m: i64| coef[(m + n as i64 - 1) as usize];
    let perms = permutations(n);
    let mut total = Complex64::new(0.0, 0.0);
    for (sigma, ss) in &perms {
        for (tau, st) in &perms {
            let mut prod = Complex64::new(ss * st, 0.0);
            for a in 0..n {
                prod *= at(tau[a] as i64 - sigma[a] as i64);
            }
            total += prod;
        }
    }
    let factorial: f64 = (1..=n).map(|k| k as f64).product();
    Ok(SeriesResult {
        value: total / factorial,
        tail_bound,
        order: policy.order,
    })
}

fn check_capacity(p: usize, q: usize, n: usize, cap: &Capacity) -> Result<()> {
    let checks = [
        ("p (series oracle)", p, cap.max_p),
        ("q (series oracle)", q, cap.max_q),
        ("N (series oracle)", n, cap.max_n),
    ];
    for (what, v, limit) in checks {
        if v > limit {
            return Err(Error::Capacity {
                what,
                requested: v as u128,
                limit: limit as u128,
            });
        }
    }
    Ok(())
}

fn inverses(v: &[Complex64]) -> Vec<Complex64> {
    v.iter().map(|x| 1.0 / x).collect()
}

/// χ as a torus average, with the default capacity.
pub fn torus_average(params: &SpectralParams, policy: &TruncationPolicy) -> Result<SeriesResult> {
    torus_average_with(params, policy, &Capacity::default())
}

pub fn torus_average_with(params: &SpectralParams, policy: &TruncationPolicy, cap: &Capacity) -> Result<SeriesResult> {
    let (p, q, n) = (params.p(), params.q(), params.dim());
    check_capacity(p, q, n, cap)?;
    let (xs, ys) = (params.xs(), params.ys());
    // (1 − x_l z)/(1 − y_l z) = (x_l/y_l)(1 − 1/(x_l z))/(1 − 1/(y_l z))
    let mult = xs[p..]
        .iter()
        .zip(&ys[p..])
        .fold(Complex64::new(1.0, 0.0), |acc, (x, y)| acc * x / y);
    let f = Integrand {
        mult,
        num_pos: xs[..p].to_vec(),
        num_neg: inverses(&xs[p..]),
        den_pos: ys[..p].to_vec(),
        den_neg: inverses(&ys[p..]),
    };
    average(&f, n, policy)
}

/// The unequal-count average `∫ ∏Det(1 − x_j u) ∏Det(1 − ū/x_l) / (∏Det(1 − y_j u) ∏Det(1 − ū/y_l))`.
pub fn torus_average_extended(params: &ExtendedParams, policy: &TruncationPolicy) -> Result<SeriesResult> {
    torus_average_extended_with(params, policy, &Capacity::default())
}

pub fn torus_average_extended_with(
    params: &ExtendedParams,
    policy: &TruncationPolicy,
    cap: &Capacity,
) -> Result<SeriesResult> {
    let (p, q, n) = (params.p(), params.q(), params.dim());
    check_capacity(p.max(params.pprime()), q.max(params.qprime()), n, cap)?;
    let (xs, ys) = (params.xs(), params.ys());
    let pp = params.pprime();
    let f = Integrand {
        mult: Complex64::new(1.0, 0.0),
        num_pos: xs[..p].to_vec(),
        num_neg: inverses(&xs[p..]),
        den_pos: ys[..pp].to_vec(),
        den_neg: inverses(&ys[pp..]),
    };
    average(&f, n, policy)
}

/// χ at `N = 1` by residues: the only poles inside the unit circle besides
/// `z = 0` sit at `z = 1/y_l`.
pub fn contour_residue_n1(params: &SpectralParams) -> Result<Complex64> {
    if params.dim() != 1 {
        return Err(Error::Value(format!("residue path needs N = 1, got {}", params.dim())));
    }
    let (xs, ys, p) = (params.xs(), params.ys(), params.p());
    let mut chi = Complex64::new(1.0, 0.0);
    for l in p..ys.len() {
        let yl = ys[l];
        let num: Complex64 = xs.iter().map(|x| 1.0 - x / yl).product();
        let mut den = Complex64::new(1.0, 0.0);
        for (k, y) in ys.iter().enumerate() {
            if k != l {
                den *= 1.0 - y / yl;
            }
        }
        if den.norm() == 0.0 {
            return Err(Error::SingularInput("coincident y_l poles".into()));
        }
        chi -= num / den;
    }
    Ok(chi)
}
