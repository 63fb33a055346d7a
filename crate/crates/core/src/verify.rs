//! Acceptance checks, one per criterion, runnable from the CLI and tests.
//!
//! Every check draws its random inputs from a stream derived from the
//! suite seed, so a report is a pure function of `(criterion, seed)`.

use std::f64::consts::TAU;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{eval_compact, eval_cor12, eval_stable, eval_thm1};
use crate::grassmann::random::{random_even_supermatrix, random_supermatrix, SmallInts};
use crate::grassmann::{
    grassmann_character_mc, sdet, sdet_form1, sdet_form2, supertrace, GMatrix, GrassmannElement, Parity, Supermatrix,
};
use crate::haar_mc::{mc_estimate, mc_estimate_extended};
use crate::params::{highest_weight_multiplier, ExtendedParams, SpectralParams};
use crate::radial::{
    cauchy_det_squared, compact_j, pde_residual, perturbed_pde_residual, sqrt_j_residual, RadialPoint,
};
use crate::series_oracle::{torus_average, TruncationPolicy};
use crate::spectra::{default_grid, fourier_support, random_weyl_element, weyl_orbit_check};

/// Shapes `(p, q)` of the oracle grid.
pub const SHAPES: [(usize, usize); 4] = [(1, 1), (2, 1), (1, 2), (2, 2)];
pub const MC_SIGMAS: f64 = 4.0;
pub const MC_SAMPLES: u64 = 100_000;
const SERIES_ORDER: usize = 90;

/// The criteria in order; the index plus one is the criterion number.
pub const CRITERIA: [&str; 14] = [
    "golden",
    "trivial-identity",
    "oracle-triangle",
    "extended-counts",
    "compact",
    "stable",
    "degeneration",
    "weyl",
    "fourier",
    "radial",
    "cauchy",
    "grassmann-kernel",
    "grassmann-character",
    "determinism",
];

/// Criteria without large Monte Carlo runs.
pub const FAST: [u8; 9] = [1, 2, 5, 6, 7, 8, 10, 11, 12];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Suite(Vec<u8>);

impl Suite {
    pub fn all() -> Self {
        Self((1..=CRITERIA.len() as u8).collect())
    }

    pub fn ids(&self) -> &[u8] {
        &self.0
    }
}

impl FromStr for Suite {
    type Err = Error;

    /// `all`, `fast`, or a comma list of criterion numbers and names.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => return Ok(Self::all()),
            "fast" => return Ok(Self(FAST.to_vec())),
            _ => {}
        }
        let mut ids = Vec::new();
        for part in s.split(',').map(str::trim) {
            let id = match part.parse::<u8>() {
                Ok(n) if (1..=CRITERIA.len() as u8).contains(&n) => n,
                _ => CRITERIA
                    .iter()
                    .position(|&name| name == part)
                    .map(|i| i as u8 + 1)
                    .ok_or_else(|| Error::Value(format!("unknown suite or criterion '{part}'")))?,
            };
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        ids.sort_unstable();
        Ok(Self(ids))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub outcomes: Vec<Outcome>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for o in &self.outcomes {
            writeln!(f, "{o}")?;
        }
        let n = self.outcomes.iter().filter(|o| o.passed).count();
        write!(f, "{n}/{} passed (seed {})", self.outcomes.len(), self.seed)
    }
}

pub fn run_suite(suite: &Suite, seed: u64) -> Report {
    Report {
        seed,
        outcomes: suite.ids().iter().map(|&id| run_criterion(id, seed)).collect(),
    }
}

pub fn run_criterion(id: u8, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    let result = match id {
        1 => golden(),
        2 => trivial_identity(&mut rng),
        3 => oracle_triangle(&mut rng, seed),
        4 => extended_counts(&mut rng, seed),
        5 => compact(),
        6 => stable(),
        7 => degeneration(&mut rng),
        8 => weyl(&mut rng),
        9 => fourier(&mut rng),
        10 => radial(&mut rng),
        11 => cauchy(&mut rng),
        12 => grassmann_kernel(&mut rng),
        13 => grassmann_character(seed),
        14 => determinism(seed),
        _ => Err(Error::Value(format!("no criterion {id}"))),
    };
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome {
        id,
        name: CRITERIA.get(id as usize - 1).copied().unwrap_or("unknown"),
        passed,
        detail,
    }
}

type Check = Result<(bool, String)>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn polar<R: Rng + ?Sized>(rng: &mut R, r: std::ops::Range<f64>) -> Complex64 {
    Complex64::from_polar(rng.random_range(r), rng.random_range(0.0..TAU))
}

/// `|x| ∈ [0.5, 1.5)`, `|y_j| ∈ [0.2, 0.6)`, `|y_l| ∈ [1.7, 4)`, uniform phases.
pub fn random_ys<R: Rng + ?Sized>(inner: usize, outer: usize, rng: &mut R) -> Vec<Complex64> {
    let mut ys: Vec<Complex64> = (0..inner).map(|_| polar(rng, 0.2..0.6)).collect();
    ys.extend((0..outer).map(|_| polar(rng, 1.7..4.0)));
    ys
}

pub fn random_params<R: Rng + ?Sized>(p: usize, q: usize, n: usize, rng: &mut R) -> Result<SpectralParams> {
    let xs = (0..p + q).map(|_| polar(rng, 0.5..1.5)).collect();
    SpectralParams::new(p, q, n, xs, random_ys(p, q, rng))
}

/// Like [`random_params`] with every `x` on the unit circle.
pub fn random_circle_params<R: Rng + ?Sized>(p: usize, q: usize, n: usize, rng: &mut R) -> Result<SpectralParams> {
    let xs = (0..p + q)
        .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..TAU)))
        .collect();
    SpectralParams::new(p, q, n, xs, random_ys(p, q, rng))
}

pub fn golden_params() -> SpectralParams {
    SpectralParams::new(1, 1, 1, vec![c(2.0), c(3.0)], vec![c(0.5), c(4.0)]).expect("valid")
}

fn golden() -> Check {
    let v = eval_thm1(&golden_params())?.value;
    let err = (v - c(6.0 / 7.0)).norm();
    Ok((
        err <= 1e-12,
        format!("value {:.15}, |error| {err:.2e} (tol 1e-12)", v.re),
    ))
}

fn trivial_identity(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let (p, q) = loop {
            let s = (rng.random_range(0..=2usize), rng.random_range(0..=2usize));
            if s.0 + s.1 > 0 {
                break s;
            }
        };
        let n = rng.random_range(1..=5usize);
        let ys = random_ys(p, q, rng);
        let prm = SpectralParams::new(p, q, n, ys.clone(), ys)?;
        worst = worst.max((eval_thm1(&prm)?.value - c(1.0)).norm());
    }
    Ok((worst <= 1e-12, format!("20 sets, max |χ − 1| {worst:.2e} (tol 1e-12)")))
}

fn oracle_triangle(rng: &mut ChaCha8Rng, seed: u64) -> Check {
    let mut series_fail = 0;
    let mut mc_fail = 0;
    let mut worst_series: f64 = 0.0;
    let mut worst_sigma: f64 = 0.0;
    let mut count = 0u64;
    for (p, q) in SHAPES {
        for n in 1..=3 {
            for _ in 0..5 {
                let prm = random_params(p, q, n, rng)?;
                let v = eval_thm1(&prm)?.value;
                let s = torus_average(&prm, &TruncationPolicy::new(SERIES_ORDER))?;
                let d = (s.value - v).norm();
                worst_series = worst_series.max(d);
                if d > 1e-8f64.max(s.tail_bound) {
                    series_fail += 1;
                }
                let e = mc_estimate(&prm, MC_SAMPLES, seed.wrapping_add(count))?;
                count += 1;
                let dev = e.mean - v;
                worst_sigma = worst_sigma.max(dev.re.abs().max(dev.im.abs()) / e.stderr);
                if !e.within(v, MC_SIGMAS) {
                    mc_fail += 1;
                }
            }
        }
    }
    Ok((
        series_fail == 0 && mc_fail == 0,
        format!(
            "{count} sets; series max |Δ| {worst_series:.2e} ({series_fail} over tol); MC max {worst_sigma:.2}σ ({mc_fail} over 4σ)"
        ),
    ))
}

fn extended_counts(rng: &mut ChaCha8Rng, seed: u64) -> Check {
    let mut worst: f64 = 0.0;
    for (p, q) in SHAPES {
        for n in 1..=3 {
            let prm = random_params(p, q, n, rng)?;
            let t = eval_thm1(&prm)?.value / highest_weight_multiplier(&prm);
            let e = eval_cor12(&ExtendedParams::from(&prm))?.value;
            worst = worst.max((t - e).norm() / t.norm());
        }
    }
    // (p, q, p', q', N) on the boundary p' = p + N or q' = q + N
    let cases = [
        (1, 1, 2, 1, 1),
        (1, 1, 1, 2, 1),
        (0, 1, 1, 1, 1),
        (1, 0, 1, 1, 1),
        (1, 0, 3, 0, 2),
    ];
    let mut sigma: f64 = 0.0;
    let mut mc_fail = 0;
    for (i, &(p, q, pp, qp, n)) in cases.iter().enumerate() {
        let xs = (0..p + q).map(|_| polar(rng, 0.5..1.5)).collect();
        let prm = ExtendedParams::new((p, q), (pp, qp), n, xs, random_ys(pp, qp, rng))?;
        let v = eval_cor12(&prm)?.value;
        let est = mc_estimate_extended(&prm, MC_SAMPLES, seed.wrapping_add(1000 + i as u64))?;
        let d = est.mean - v;
        sigma = sigma.max(d.re.abs().max(d.im.abs()) / est.stderr);
        if !est.within(v, MC_SIGMAS) {
            mc_fail += 1;
        }
    }
    Ok((
        worst <= 1e-12 && mc_fail == 0,
        format!(
            "reduction max rel {worst:.2e} (tol 1e-12); {} boundary cases, MC max {sigma:.2}σ ({mc_fail} over 4σ)",
            cases.len()
        ),
    ))
}

fn compact() -> Check {
    let a = eval_compact(1, 1, 2, &[c(0.3), c(0.7)])?.value;
    let b = eval_compact(1, 1, 2, &[c(0.3), c(0.3)])?.value;
    let (ea, eb) = ((a - c(0.79)).norm(), (b - c(0.27)).norm());
    Ok((
        ea <= 1e-12 && eb <= 1e-6,
        format!("(0.3,0.7): |error| {ea:.2e} (tol 1e-12); confluent (0.3,0.3): |error| {eb:.2e} (tol 1e-6)"),
    ))
}

fn stable() -> Check {
    let ys = [c(0.5), c(2.0)];
    let s = eval_stable(1, 1, 3, &ys)?.value;
    let es = (s - c(1.0 / 6.0)).norm();
    let prm = SpectralParams::new(1, 1, 3, vec![c(1e-8), c(1e8)], ys.to_vec())?;
    let t = eval_thm1(&prm)?.value / c(1e8).powu(3);
    let et = (t - s).norm();
    Ok((
        es <= 1e-12 && et <= 1e-6,
        format!("closed form |error| {es:.2e} (tol 1e-12); coset sum at xs=(1e-8,1e8) |Δ| {et:.2e} (tol 1e-6)"),
    ))
}

fn degeneration(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let n = rng.random_range(1..=3usize);
        let xs: Vec<Complex64> = (0..2).map(|_| polar(rng, 0.5..1.5)).collect();
        let prm = SpectralParams::new(1, 1, n, xs.clone(), vec![c(1e-8), c(1e8)])?;
        let t = eval_thm1(&prm)?.value * c(1e8).powu(n as u32);
        let k = eval_compact(1, 1, n, &xs)?.value;
        worst = worst.max((t - k).norm() / k.norm().max(1.0));
    }
    Ok((worst <= 1e-6, format!("10 x-sets, max rel |Δ| {worst:.2e} (tol 1e-6)")))
}

fn weyl(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for (p, q) in SHAPES {
        for _ in 0..50 {
            let n = rng.random_range(1..=3usize);
            let prm = random_params(p, q, n, rng)?;
            let (a, b, cc) = random_weyl_element(p, q, rng);
            worst = worst.max(weyl_orbit_check(&prm, &a, &b, &cc)?);
        }
    }
    Ok((
        worst <= 1e-10,
        format!("200 elements, max rel deviation {worst:.2e} (tol 1e-10)"),
    ))
}

fn fourier(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    let mut profiles = 0;
    for (p, q) in SHAPES {
        for n in 1..=3 {
            for _ in 0..5 {
                let prm = random_circle_params(p, q, n, rng)?;
                for k in 0..p + q {
                    worst = worst.max(fourier_support(&prm, k, default_grid(n))?.leakage());
                    profiles += 1;
                }
            }
        }
    }
    Ok((
        worst <= 1e-9,
        format!("{profiles} profiles, max leakage {worst:.2e} (tol 1e-9)"),
    ))
}

fn radial(rng: &mut ChaCha8Rng) -> Check {
    let mut pde: f64 = 0.0;
    let mut sqrt_j: f64 = 0.0;
    for (p, q) in SHAPES {
        for _ in 0..20 {
            let pt = RadialPoint::random(p, q, rng)?;
            for k in 1..=4 {
                sqrt_j = sqrt_j.max(sqrt_j_residual(&pt, k)?);
            }
            for n in 1..=3 {
                for l in 1..=3 {
                    pde = pde.max(pde_residual(&pt, n, l)?);
                }
            }
        }
    }
    let pt = RadialPoint::random(1, 1, rng)?;
    let control = (1..=3)
        .map(|l| perturbed_pde_residual(&pt, 1, l, 1e-3))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok((
        pde < 1e-8 && sqrt_j < 1e-8 && control > 1e-5,
        format!("D_l(J^1/2 χ) max {pde:.2e}, D_k J^1/2 max {sqrt_j:.2e} (tol 1e-8); perturbed min {control:.2e} (need > 1e-5)"),
    ))
}

fn cauchy(rng: &mut ChaCha8Rng) -> Check {
    let mut worst: f64 = 0.0;
    for n in 2..=3 {
        for _ in 0..20 {
            let psi: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
            let theta: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
            let a = compact_j(&psi, &theta)?;
            let b = cauchy_det_squared(&psi, &theta)?;
            worst = worst.max((a - b).abs() / a.abs());
        }
    }
    Ok((
        worst <= 1e-10,
        format!("40 points, max rel |Δ| {worst:.2e} (tol 1e-10)"),
    ))
}

fn rel(a: &GrassmannElement, b: &GrassmannElement) -> f64 {
    a.max_abs_diff(b) / a.max_abs().max(b.max_abs()).max(1.0)
}

fn grassmann_kernel(rng: &mut ChaCha8Rng) -> Check {
    const TRIALS: usize = 1000;
    let (mut forms, mut mult, mut conj, mut bracket): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let parities = [Parity::Even, Parity::Odd];
    for t in 0..TRIALS {
        let k = t % 5;
        let x = random_even_supermatrix(k, 2, 2, rng, SmallInts(false));
        let y = random_even_supermatrix(k, 2, 2, rng, SmallInts(false));
        forms = forms.max(rel(&sdet_form1(&x)?, &sdet_form2(&x)?));
        let xy = sdet(&x.mul(&y)?)?;
        mult = mult.max(rel(&xy, &(&sdet(&x)? * &sdet(&y)?)));
        let g = random_even_supermatrix(k, 2, 2, rng, SmallInts(false));
        let moved = g.mul(&x)?.mul(&g.inverse()?)?;
        conj = conj.max(rel(&sdet(&moved)?, &sdet(&x)?));
        let (px, py) = (parities[t % 2], parities[(t / 2) % 2]);
        let u = random_supermatrix(k, 2, 2, px, rng, SmallInts(false));
        let v = random_supermatrix(k, 2, 2, py, rng, SmallInts(false));
        let scale = u.max_abs_diff(&u.scale(c(0.0))) * v.max_abs_diff(&v.scale(c(0.0)));
        bracket = bracket.max(supertrace(&u.bracket(&v)?).max_abs() / scale.max(1.0));
    }
    let k = 2;
    let (beta, gamma) = (GrassmannElement::generator(k, 0), GrassmannElement::generator(k, 1));
    let cell = |e| GMatrix::from_rows(k, vec![vec![e]]);
    let x = Supermatrix::new(
        cell(GrassmannElement::scalar(k, c(2.0)))?,
        cell(beta.clone())?,
        cell(gamma.clone())?,
        cell(GrassmannElement::scalar(k, c(4.0)))?,
        Parity::Even,
    )?;
    let want = GrassmannElement::scalar(k, c(2.0)) + (&beta * &gamma).scale(c(0.25));
    let gold = sdet(&x)?.max_abs_diff(&want);
    let ok = forms <= 1e-12 && mult <= 1e-12 && conj <= 1e-12 && bracket <= 1e-12 && gold <= 1e-14;
    Ok((
        ok,
        format!(
            "{TRIALS} trials: forms {forms:.2e}, multiplicativity {mult:.2e}, conjugation {conj:.2e}, STr bracket {bracket:.2e} (tol 1e-12); 1|1 golden {gold:.2e} (tol 1e-14)"
        ),
    ))
}

fn grassmann_character(seed: u64) -> Check {
    let prm = golden_params();
    let k = 2;
    let mut x = Supermatrix::diagonal(k, prm.xs(), prm.ys());
    let mut b = x.b().clone();
    let mut cc = x.c().clone();
    b[(0, 0)] = GrassmannElement::generator(k, 0).scale(c(0.3));
    cc[(0, 0)] = GrassmannElement::generator(k, 1).scale(c(0.7));
    x = Supermatrix::new(x.a().clone(), b, cc, x.d().clone(), Parity::Even)?;
    let g = grassmann_character_mc(&x, prm.dim(), MC_SAMPLES, seed)?;
    let v = eval_thm1(&prm)?.value;
    let d = g.mean[0] - v;
    let sigma = d.re.abs().max(d.im.abs()) / g.stderr[0];
    let plain = Supermatrix::diagonal(0, prm.xs(), prm.ys());
    let g0 = grassmann_character_mc(&plain, prm.dim(), MC_SAMPLES, seed)?;
    let e = mc_estimate(&prm, MC_SAMPLES, seed)?;
    let bitwise = g0.mean[0] == e.mean && g0.stderr[0] == e.stderr;
    Ok((
        sigma <= MC_SIGMAS && bitwise,
        format!("numerical part {sigma:.2}σ from χ (tol 4σ); zero generators bitwise equal: {bitwise}"),
    ))
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::NumericalFailure(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn determinism(seed: u64) -> Check {
    let prm = golden_params().with_dim(3)?;
    let subset = Suite(vec![1, 2, 5, 7, 11]);
    let mut estimates = Vec::new();
    let mut reports = Vec::new();
    for threads in [1, 2, 8] {
        estimates.push(in_pool(threads, || mc_estimate(&prm, 20_000, seed))??);
        reports.push(in_pool(threads, || serde_json::to_string(&run_suite(&subset, seed)))?);
    }
    let reports = reports
        .into_iter()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::NumericalFailure(e.to_string()))?;
    let same_mc = estimates.windows(2).all(|w| w[0] == w[1]);
    let same_report = reports.windows(2).all(|w| w[0] == w[1]);
    Ok((
        same_mc && same_report,
        format!("1/2/8 threads: estimates identical {same_mc}, reports identical {same_report}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_parsing() {
        assert_eq!(Suite::from_str("all").unwrap(), Suite::all());
        assert_eq!(Suite::from_str("5,golden,5").unwrap().ids(), &[1, 5]);
        assert_eq!(Suite::from_str("fast").unwrap().ids(), &FAST);
        assert!(Suite::from_str("15").is_err());
        assert!(Suite::from_str("nope").is_err());
    }

    #[test]
    fn cheap_criteria_pass() {
        for id in [1, 5, 6, 11] {
            let o = run_criterion(id, 7);
            assert!(o.passed, "{o}");
        }
    }

    #[test]
    fn random_params_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (p, q) in SHAPES {
            let prm = random_circle_params(p, q, 2, &mut rng).unwrap();
            assert!(prm.xs().iter().all(|x| (x.norm() - 1.0).abs() < 1e-15));
        }
    }
}
