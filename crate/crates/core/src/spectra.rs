//! Weight support and Weyl symmetry of χ.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::formula::{eval_stable, eval_thm1};
use crate::params::SpectralParams;

const ON_CIRCLE: f64 = 1e-12;

/// Fourier magnitudes of χ along one angle `ψ_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierProfile {
    /// 0-based variable index.
    pub index: usize,
    pub grid: usize,
    pub order: u32,
    /// Magnitudes for modes `−G/2 … G/2 − 1`.
    pub magnitudes: Vec<f64>,
}

impl FourierProfile {
    pub fn mode(&self, m: i64) -> f64 {
        let half = (self.grid / 2) as i64;
        assert!((-half..half).contains(&m), "mode {m} outside the grid");
        self.magnitudes[(m + half) as usize]
    }

    pub fn max_magnitude(&self) -> f64 {
        self.magnitudes.iter().copied().fold(0.0, f64::max)
    }

    /// Largest magnitude outside `[0, N]`, relative to the largest overall.
    pub fn leakage(&self) -> f64 {
        let half = (self.grid / 2) as i64;
        let outside = (-half..half)
            .filter(|&m| m < 0 || m > self.order as i64)
            .map(|m| self.mode(m))
            .fold(0.0, f64::max);
        let top = self.max_magnitude();
        if top == 0.0 {
            outside
        } else {
            outside / top
        }
    }
}

/// `max(16, 4N)` rounded up to a power of two.
pub fn default_grid(n: usize) -> usize {
    (4 * n).max(16).next_power_of_two()
}

fn check_grid(grid: usize, n: usize) -> Result<()> {
    if !grid.is_power_of_two() {
        return Err(Error::Value(format!("grid size {grid} is not a power of two")));
    }
    if grid < 4 * n {
        return Err(Error::AliasWarning {
            grid,
            order: n as u32,
            required: 4 * n,
        });
    }
    Ok(())
}

fn angle_grid(grid: usize) -> impl IndexedParallelIterator<Item = Complex64> {
    (0..grid)
        .into_par_iter()
        .map(move |g| Complex64::from_polar(1.0, std::f64::consts::TAU * g as f64 / grid as f64))
}

/// Samples χ on `G` equispaced values of `ψ_k` (0-based `k`) with the other
/// parameters fixed, and returns the DFT magnitudes.
pub fn fourier_support(params: &SpectralParams, k: usize, grid: usize) -> Result<FourierProfile> {
    if k >= params.len() {
        return Err(Error::Value(format!("variable index {} out of range", k + 1)));
    }
    for (i, x) in params.xs().iter().enumerate() {
        if (x.norm() - 1.0).abs() > ON_CIRCLE {
            return Err(Error::DomainViolation {
                index: i + 1,
                detail: format!("|x_{}| = {} is not on the unit circle", i + 1, x.norm()),
            });
        }
    }
    check_grid(grid, params.dim())?;
    let mut buf: Vec<Complex64> = angle_grid(grid)
        .map(|x| {
            let mut xs = params.xs().to_vec();
            xs[k] = x;
            Ok(eval_thm1(&params.with_xs(xs)?)?.value)
        })
        .collect::<Result<_>>()?;
    FftPlanner::new().plan_fft_forward(grid).process(&mut buf);
    let half = grid / 2;
    let magnitudes = (0..grid)
        .map(|i| buf[(i + grid - half) % grid].norm() / grid as f64)
        .collect();
    Ok(FourierProfile {
        index: k,
        grid,
        order: params.dim() as u32,
        magnitudes,
    })
}

fn check_permutation(perm: &[usize], range: std::ops::Range<usize>, what: &str) -> Result<()> {
    let mut seen = vec![false; range.len()];
    for &i in perm {
        if !range.contains(&i) {
            return Err(Error::BlockViolation(format!(
                "{what} maps into index {} outside {}..={}",
                i + 1,
                range.start + 1,
                range.end
            )));
        }
        if std::mem::replace(&mut seen[i - range.start], true) {
            return Err(Error::Value(format!("{what} repeats index {}", i + 1)));
        }
    }
    if perm.len() != range.len() {
        return Err(Error::Shape(format!(
            "{what} has {} entries, expected {}",
            perm.len(),
            range.len()
        )));
    }
    Ok(())
}

/// `|χ(w·params) − χ(params)| / |χ(params)|` where `w` permutes the xs by
/// `perm_psi` and the ys within each block. Permutations are 0-based
/// global indices: `perm_phi_p` must permute `0..p`, `perm_phi_q` must
/// permute `p..p+q`.
pub fn weyl_orbit_check(
    params: &SpectralParams,
    perm_psi: &[usize],
    perm_phi_p: &[usize],
    perm_phi_q: &[usize],
) -> Result<f64> {
    let (p, n) = (params.p(), params.len());
    check_permutation(perm_psi, 0..n, "ψ permutation")?;
    check_permutation(perm_phi_p, 0..p, "first φ block")?;
    check_permutation(perm_phi_q, p..n, "second φ block")?;
    let xs = perm_psi.iter().map(|&i| params.xs()[i]).collect();
    let ys = perm_phi_p.iter().chain(perm_phi_q).map(|&i| params.ys()[i]).collect();
    let moved = params.with_xs(xs)?.with_ys(ys)?;
    let base = eval_thm1(params)?.value;
    let other = eval_thm1(&moved)?.value;
    let diff = (other - base).norm();
    Ok(if base.norm() == 0.0 { diff } else { diff / base.norm() })
}

/// A uniformly random element of `S_{p+q} × S_p × S_q`.
pub fn random_weyl_element<R: Rng + ?Sized>(p: usize, q: usize, rng: &mut R) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    let mut a: Vec<usize> = (0..p + q).collect();
    let mut b: Vec<usize> = (0..p).collect();
    let mut c: Vec<usize> = (p..p + q).collect();
    a.shuffle(rng);
    b.shuffle(rng);
    c.shuffle(rng);
    (a, b, c)
}

/// Compares the joint top mode `(N, …, N)` in the `ψ_l` (`l > p`) with
/// the stable-range value, after sending the `x_j` (`j ≤ p`) to `eps`.
/// Returns the relative deviation.
pub fn stable_mode_check(p: usize, q: usize, n: usize, ys: &[Complex64], eps: f64) -> Result<f64> {
    let want = eval_stable(p, q, n, ys)?.value;
    if q > 2 {
        return Err(Error::Capacity {
            what: "ψ_l variables in the stable mode check",
            requested: q as u128,
            limit: 2,
        });
    }
    let grid = default_grid(n);
    let points: Vec<Complex64> = (0..grid)
        .map(|g| Complex64::from_polar(1.0, std::f64::consts::TAU * g as f64 / grid as f64))
        .collect();
    let total = grid.pow(q as u32);
    let base_x: Vec<Complex64> = (0..p).map(|j| Complex64::from_polar(eps, 0.7 + j as f64)).collect();
    let terms: Vec<Complex64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut xs = base_x.clone();
            let mut weight = Complex64::new(1.0, 0.0);
            let mut rest = flat;
            for _ in 0..q {
                let x = points[rest % grid];
                rest /= grid;
                xs.push(x);
                weight *= x.conj().powu(n as u32);
            }
            let prm = SpectralParams::new(p, q, n, xs, ys.to_vec())?;
            Ok(eval_thm1(&prm)?.value * weight)
        })
        .collect::<Result<_>>()?;
    let got = terms.iter().sum::<Complex64>() / total as f64;
    Ok((got - want).norm() / want.norm())
}
