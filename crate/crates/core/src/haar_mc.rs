//! Monte Carlo estimates of Haar averages over U(N).
//!
//! Sample `i` of a run with seed `s` draws from its own ChaCha8 stream
//! `(s, i)`, and samples are reduced in fixed blocks merged by a fixed
//! pairwise tree, so an estimate does not depend on how many threads ran it.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{ExtendedParams, SpectralParams};

pub const DEFAULT_SEED: u64 = 0x5EED;
pub const SEED_ENV: &str = "RATIOKIT_SEED";

/// Samples per sequential accumulation block.
pub const BLOCK: usize = 1024;

pub const METHOD: &str = "haar-qr-schur";

/// Reads [`SEED_ENV`] as decimal or `0x`-prefixed hex.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => parse_seed(&s).map(Some),
        Err(_) => Ok(None),
    }
}

pub fn parse_seed(s: &str) -> Result<u64> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| Error::Value(format!("seed {s:?} is not a 64-bit integer")))
}

/// The random stream for sample `index` of a run seeded with `seed`.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// The spectrum of one Haar-random unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitarySample {
    eigenvalues: Vec<Complex64>,
}

impl UnitarySample {
    /// Wraps a given spectrum; every entry must have modulus 1 within 1e-10.
    /// Entries are stored in a canonical order (by angle), so any
    /// permutation of the same multiset gives an identical sample.
    pub fn new(mut eigenvalues: Vec<Complex64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::Value("a sample needs at least one eigenvalue".into()));
        }
        for (i, l) in eigenvalues.iter().enumerate() {
            if (l.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::Value(format!("eigenvalue {} has modulus {}", i + 1, l.norm())));
            }
        }
        eigenvalues.sort_by(|a, b| {
            a.arg()
                .total_cmp(&b.arg())
                .then(a.re.total_cmp(&b.re))
                .then(a.im.total_cmp(&b.im))
        });
        Ok(Self { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// A Haar-distributed unitary matrix: QR of a complex Ginibre matrix with
/// the phases of `R`'s diagonal moved into `Q`.
pub fn sample_haar_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DMatrix<Complex64>> {
    if n == 0 {
        return Err(Error::Value("N must be at least 1".into()));
    }
    let z = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = z.qr();
    let mut u = qr.q();
    let r = qr.r();
    for i in 0..n {
        let d = r[(i, i)];
        let norm = d.norm();
        if norm == 0.0 {
            return Err(Error::NumericalFailure("rank-deficient Gaussian draw".into()));
        }
        let phase = d / norm;
        for k in 0..n {
            u[(k, i)] *= phase;
        }
    }
    let defect = (u.adjoint() * &u - DMatrix::identity(n, n)).camax();
    if defect >= 1e-12 {
        return Err(Error::NumericalFailure(format!("unitarity defect {defect:.3e}")));
    }
    Ok(u)
}

/// Eigenvalues of a unitary matrix via complex Schur form, projected to the
/// unit circle.
pub fn unitary_spectrum(u: &DMatrix<Complex64>) -> Result<UnitarySample> {
    let n = u.nrows();
    let schur = Schur::try_new(u.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let residual = (&q * &t * q.adjoint() - u).camax();
    if residual > 1e-8 {
        return Err(Error::NumericalFailure(format!("eigensolver residual {residual:.3e}")));
    }
    let eig = (0..n)
        .map(|i| {
            let l = t[(i, i)];
            l / l.norm()
        })
        .collect();
    UnitarySample::new(eig)
}

pub fn sample_haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitarySample> {
    unitary_spectrum(&sample_haar_matrix(n, rng)?)
}

const SINGULAR: f64 = 1e-14;

/// `∏_k (1 − x_k λ)/(1 − y_k λ)` for one eigenvalue.
pub fn eigen_factor(xs: &[Complex64], ys: &[Complex64], lambda: Complex64) -> Result<Complex64> {
    let mut num = Complex64::new(1.0, 0.0);
    let mut den = Complex64::new(1.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let d = 1.0 - y * lambda;
        if d.norm() < SINGULAR {
            return Err(Error::SingularSample(d.norm()));
        }
        num *= 1.0 - x * lambda;
        den *= d;
    }
    Ok(num / den)
}

/// The integrand `∏_k Det(1 − x_k u)/Det(1 − y_k u)` at a sampled spectrum.
pub fn eval_z(params: &SpectralParams, sample: &UnitarySample) -> Result<Complex64> {
    if sample.dim() != params.dim() {
        return Err(Error::Shape(format!(
            "sample dimension {} does not match N = {}",
            sample.dim(),
            params.dim()
        )));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for &l in sample.eigenvalues() {
        acc *= eigen_factor(params.xs(), params.ys(), l)?;
    }
    Ok(acc)
}

/// The unequal-count integrand, with the conjugate slots written in `ū`.
pub fn eval_z_extended(params: &ExtendedParams, sample: &UnitarySample) -> Result<Complex64> {
    if sample.dim() != params.dim() {
        return Err(Error::Shape(format!(
            "sample dimension {} does not match N = {}",
            sample.dim(),
            params.dim()
        )));
    }
    let (p, pp) = (params.p(), params.pprime());
    let (xs, ys) = (params.xs(), params.ys());
    let one = Complex64::new(1.0, 0.0);
    let mut acc = one;
    for &l in sample.eigenvalues() {
        let lc = l.conj();
        let mut num = one;
        let mut den = one;
        for x in &xs[..p] {
            num *= one - x * l;
        }
        for x in &xs[p..] {
            num *= one - lc / x;
        }
        for y in &ys[..pp] {
            den *= one - y * l;
        }
        for y in &ys[pp..] {
            den *= one - lc / y;
        }
        if den.norm() < SINGULAR {
            return Err(Error::SingularSample(den.norm()));
        }
        acc *= num / den;
    }
    Ok(acc)
}

/// Streaming mean and second moments of several complex channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Accumulator {
    count: u64,
    mean: Vec<Complex64>,
    m2_re: Vec<f64>,
    m2_im: Vec<f64>,
}

impl Accumulator {
    pub fn new(channels: usize) -> Self {
        Self {
            count: 0,
            mean: vec![Complex64::new(0.0, 0.0); channels],
            m2_re: vec![0.0; channels],
            m2_im: vec![0.0; channels],
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Welford update.
    pub fn push(&mut self, values: &[Complex64]) {
        assert_eq!(values.len(), self.mean.len(), "channel count mismatch");
        self.count += 1;
        let n = self.count as f64;
        for (c, v) in values.iter().enumerate() {
            let d = v - self.mean[c];
            self.mean[c] += d / n;
            let d2 = v - self.mean[c];
            self.m2_re[c] += d.re * d2.re;
            self.m2_im[c] += d.im * d2.im;
        }
    }

    /// Parallel-variance merge of two disjoint accumulations.
    pub fn merge(&self, other: &Self) -> Self {
        if other.count == 0 {
            return self.clone();
        }
        if self.count == 0 {
            return other.clone();
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let mut out = self.clone();
        out.count = self.count + other.count;
        for c in 0..self.mean.len() {
            let d = other.mean[c] - self.mean[c];
            out.mean[c] = self.mean[c] + d * (nb / n);
            out.m2_re[c] = self.m2_re[c] + other.m2_re[c] + d.re * d.re * na * nb / n;
            out.m2_im[c] = self.m2_im[c] + other.m2_im[c] + d.im * d.im * na * nb / n;
        }
        out
    }

    pub fn mean(&self) -> &[Complex64] {
        &self.mean
    }

    /// Standard errors of the real and imaginary parts of a channel mean.
    pub fn stderr_parts(&self, channel: usize) -> (f64, f64) {
        if self.count < 2 {
            return (f64::INFINITY, f64::INFINITY);
        }
        let n = self.count as f64;
        let se = |m2: f64| (m2.max(0.0) / (n - 1.0) / n).sqrt();
        (se(self.m2_re[channel]), se(self.m2_im[channel]))
    }

    pub fn stderr(&self, channel: usize) -> f64 {
        let (a, b) = self.stderr_parts(channel);
        a.max(b)
    }
}

fn tree_merge(mut level: Vec<Accumulator>) -> Accumulator {
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => a.merge(b),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    level.pop().expect("at least one block")
}

/// A Monte Carlo result for a single complex quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: Complex64,
    /// Larger of the real and imaginary standard errors.
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
    pub method: String,
}

impl Estimate {
    /// Whether `target` lies within `k` standard errors in both components.
    pub fn within(&self, target: Complex64, k: f64) -> bool {
        let d = self.mean - target;
        d.re.abs().max(d.im.abs()) <= k * self.stderr
    }
}

/// Runs `f` on `samples` independent Haar spectra of dimension `n` and
/// accumulates its `channels` outputs.
pub fn mc_map<F>(n: usize, channels: usize, samples: u64, seed: u64, f: F) -> Result<Accumulator>
where
    F: Fn(&UnitarySample) -> Result<Vec<Complex64>> + Sync,
{
    if samples < 2 {
        return Err(Error::Value("at least 2 samples are required".into()));
    }
    if n == 0 {
        return Err(Error::Value("N must be at least 1".into()));
    }
    let blocks = samples.div_ceil(BLOCK as u64);
    let run_block = |b: u64| -> Result<Accumulator> {
        let mut acc = Accumulator::new(channels);
        let end = ((b + 1) * BLOCK as u64).min(samples);
        for i in b * BLOCK as u64..end {
            let mut rng = sample_stream(seed, i);
            let s = sample_haar_unitary(n, &mut rng)?;
            acc.push(&f(&s)?);
        }
        Ok(acc)
    };
    let results: Vec<Result<Accumulator>> = (0..blocks).into_par_iter().map(run_block).collect();
    let accs = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(tree_merge(accs))
}

fn single(acc: &Accumulator, seed: u64) -> Estimate {
    Estimate {
        mean: acc.mean()[0],
        stderr: acc.stderr(0),
        samples: acc.count(),
        seed,
        method: METHOD.into(),
    }
}

/// Estimates χ by averaging the integrand over Haar samples.
pub fn mc_estimate(params: &SpectralParams, samples: u64, seed: u64) -> Result<Estimate> {
    let acc = mc_map(params.dim(), 1, samples, seed, |s| Ok(vec![eval_z(params, s)?]))?;
    Ok(single(&acc, seed))
}

pub fn mc_estimate_extended(params: &ExtendedParams, samples: u64, seed: u64) -> Result<Estimate> {
    let acc = mc_map(params.dim(), 1, samples, seed, |s| {
        Ok(vec![eval_z_extended(params, s)?])
    })?;
    Ok(single(&acc, seed))
}
