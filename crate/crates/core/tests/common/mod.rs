//! Shared oracles and reference configurations for the integration tests.
//!
//! The Jacobi eigensolver and the real-space quadratures live here so that
//! the checks they back stay independent of the implementation paths they
//! verify (the solver uses tridiagonalization-based eigensolves and
//! k-space moment formulas).

// Each integration-test binary uses its own subset of these helpers.
#![allow(dead_code)]

use nalgebra::DMatrix;
use wannier1d::{
    evaluate_wannier, Complex64, KConvention, PotentialSpec, RunConfig, Tolerances,
    WannierRepresentation,
};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

pub fn gaussian_cfg(band: usize, k_points: usize) -> RunConfig {
    RunConfig {
        potential: PotentialSpec::Gaussian5,
        a: TWO_PI,
        half_width: 10,
        k_points,
        k_convention: KConvention::Paper,
        band,
        x_grid: None,
        tolerances: Tolerances::default(),
    }
}

pub fn asym_cfg(band: usize, k_points: usize) -> RunConfig {
    RunConfig {
        potential: PotentialSpec::AsymExp,
        a: TWO_PI,
        half_width: 15,
        k_points,
        k_convention: KConvention::Paper,
        band,
        x_grid: None,
        tolerances: Tolerances::default(),
    }
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi sweeps with exact
/// 2x2 block diagonalization, sorted ascending. Independent of the
/// solver's eigensolver.
pub fn jacobi_eigenvalues(matrix: &DMatrix<Complex64>) -> Vec<f64> {
    let n = matrix.nrows();
    let mut a = matrix.clone();
    let scale = a
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        .max(1e-300);
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() < 1e-15 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let z = a[(p, q)];
                if z.norm() < 1e-18 * scale {
                    continue;
                }
                let d1 = a[(p, p)].re;
                let d2 = a[(q, q)].re;
                let half = 0.5 * (d1 - d2);
                let r = (half * half + z.norm_sqr()).sqrt();
                // Branch nearest d1 goes to column p (near-identity
                // rotation; a sorting rotation keeps permuting content
                // between sweeps and stalls). The eigenvalue shifts
                // lp - d1 and lq - d1 are computed in the cancellation-free
                // quotient form via (lp - d1)(lq - d1) = -|z|^2.
                let denom = half.abs() + r;
                let (dp, dq) = if half >= 0.0 {
                    (z.norm_sqr() / denom, -denom)
                } else {
                    (-z.norm_sqr() / denom, denom)
                };
                // Block eigenvectors: columns proportional to (z, l - d1).
                let col = |shift: f64| {
                    let u = z;
                    let v = Complex64::new(shift, 0.0);
                    let norm = (u.norm_sqr() + v.norm_sqr()).sqrt();
                    (u / norm, v / norm)
                };
                let (u1p, u1q) = col(dp);
                let (u2p, u2q) = col(dq);
                // Rows: A <- J^H A.
                for j in 0..n {
                    let ap = a[(p, j)];
                    let aq = a[(q, j)];
                    a[(p, j)] = u1p.conj() * ap + u1q.conj() * aq;
                    a[(q, j)] = u2p.conj() * ap + u2q.conj() * aq;
                }
                // Columns: A <- A J.
                for i in 0..n {
                    let ap = a[(i, p)];
                    let aq = a[(i, q)];
                    a[(i, p)] = ap * u1p + aq * u1q;
                    a[(i, q)] = ap * u2p + aq * u2q;
                }
            }
        }
    }
    let mut eigenvalues: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    eigenvalues.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigenvalues
}

/// First and second moments of `|W|^2` by real-space trapezoid quadrature
/// over `|x| <= half_cells * a`. The spacing stays below the band limit of
/// `|W|^2`, which makes the uniform trapezoid sum exact up to the window
/// truncation.
pub fn real_space_moments(rep: &WannierRepresentation, half_cells: usize) -> (f64, f64) {
    let a = rep.lattice_constant();
    let h = a / 64.0;
    let nmax = (half_cells as f64 * a / h).round() as i64;
    let xs: Vec<f64> = (-nmax..=nmax).map(|i| i as f64 * h).collect();
    let w = evaluate_wannier(rep, &xs);
    let norm: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>() * h;
    let mean: f64 = xs
        .iter()
        .zip(&w)
        .map(|(x, z)| x * z.norm_sqr())
        .sum::<f64>()
        * h
        / norm;
    let second: f64 = xs
        .iter()
        .zip(&w)
        .map(|(x, z)| x * x * z.norm_sqr())
        .sum::<f64>()
        * h
        / norm;
    (mean, second - mean * mean)
}

/// Best-fit slope of `ln y` vs `ln x`.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    wannier1d::log_log_slope(points).expect("slope fit needs positive data")
}
