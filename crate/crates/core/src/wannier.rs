//! Unfolding the corrected trajectory into the Wannier transform and
//! synthesizing the Wannier function in real space.
//!
//! The corrected coefficients `y~_m(k_j)` are samples of one function of
//! the unfolded frequency `xi = k + (m - M) Omega`; cell boundaries carry
//! duplicate samples which are averaged. Real-space evaluation is the
//! periodic trapezoidal sum over that uniform grid — spectrally accurate
//! because the integrand is analytic and decays.

use crate::error::{Result, SolverError};
use crate::gauge::{GaugePhases, GaugedTrajectory};
use crate::tol::SHIFT_PERIODICITY_LIMIT;
use crate::transport::Trajectory;
use crate::Complex64;

/// Exact complex exponentials are refreshed every this many samples during
/// synthesis; in between, one multiplication per sample advances the phase.
/// Keeps the phase-recursion roundoff near `BLOCK * eps`, far below every
/// asserted imaginary-part level.
const PHASE_REFRESH_BLOCK: usize = 512;

/// The Wannier transform on its uniform frequency grid.
#[derive(Debug, Clone)]
pub struct WannierRepresentation {
    a: f64,
    omega: f64,
    steps: usize,
    half_width: usize,
    /// Strictly increasing frequencies, spacing `Omega / K`, `(2M+1) K`
    /// entries after boundary deduplication.
    pub xi: Vec<f64>,
    /// Samples of the (scaled) Wannier transform at `xi`.
    pub alpha: Vec<Complex64>,
    /// Phases that produced the underlying gauge.
    pub phases: GaugePhases,
    /// Largest discrepancy between the two estimates of any interior cell
    /// boundary sample before averaging.
    pub boundary_mismatch: f64,
    /// Largest entrywise violation of `alpha(xi) = conj(alpha(-xi))`.
    pub conjugate_symmetry_residual: f64,
}

impl WannierRepresentation {
    pub fn lattice_constant(&self) -> f64 {
        self.a
    }

    pub fn reciprocal_period(&self) -> f64 {
        self.omega
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Quadrature weight sum `(Omega / K) sum |alpha|^2`; equals `Omega / a`
    /// up to the transport error.
    pub fn parseval_sum(&self) -> f64 {
        self.omega / self.steps as f64 * self.alpha.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }
}

/// First and second spatial moments of the Wannier function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub center: f64,
    pub second: f64,
    pub variance: f64,
}

/// Localization diagnostics of a synthesized Wannier function.
#[derive(Debug, Clone)]
pub struct DecayDiagnostics {
    /// `max |Im W| / max |W|` over the diagnostic grid.
    pub imag_error: f64,
    /// Least-squares slope of `ln |W|` over the envelope maxima.
    pub decay_rate: f64,
    pub max_abs: f64,
    /// Base-10 decades between the largest envelope maximum and the last
    /// one inside the window.
    pub envelope_drop_decades: f64,
}

/// Unfold a gauge-corrected trajectory into the frequency samples.
///
/// Duplicated interior cell-boundary samples (last sample of cell `m`,
/// first of cell `m+1`) are averaged; the grid keeps `(2M+1) K` distinct
/// frequencies starting at `-(M + 1/2) Omega`. Trajectories that fail the
/// shifted-periodicity check are rejected — that means the gauge was never
/// applied or the transport went wrong.
pub fn assemble_alpha(gt: &GaugedTrajectory) -> Result<WannierRepresentation> {
    let residual = gt.shift_periodicity_residual();
    if residual > SHIFT_PERIODICITY_LIMIT {
        return Err(SolverError::NotShiftPeriodic {
            residual,
            limit: SHIFT_PERIODICITY_LIMIT,
        });
    }

    let steps = gt.steps();
    let cells = gt.states[0].len();
    let half_width = (cells - 1) / 2;
    let omega = gt.reciprocal_period();
    let n = cells * steps;

    let mut xi = Vec::with_capacity(n);
    let mut alpha = Vec::with_capacity(n);
    let mut boundary_mismatch = 0.0f64;
    for cell in 0..cells {
        for j in 0..steps {
            let l = cell * steps + j;
            xi.push(omega * (l as f64 / steps as f64 - (half_width as f64 + 0.5)));
            let value = if j == 0 && cell > 0 {
                let from_left = gt.states[steps][cell - 1];
                let from_right = gt.states[0][cell];
                boundary_mismatch = boundary_mismatch.max((from_left - from_right).norm());
                0.5 * (from_left + from_right)
            } else {
                gt.states[j][cell]
            };
            alpha.push(value);
        }
    }

    Ok(WannierRepresentation {
        a: gt.lattice_constant(),
        omega,
        steps,
        half_width,
        xi,
        alpha,
        phases: gt.phases,
        boundary_mismatch,
        conjugate_symmetry_residual: gt.conjugate_symmetry_residual(),
    })
}

/// Evaluate `W(x) = (1/K) sum_l alpha_l exp(i x xi_l)` at each requested
/// point by direct summation.
pub fn evaluate_wannier(rep: &WannierRepresentation, xs: &[f64]) -> Vec<Complex64> {
    let n = rep.alpha.len();
    let dxi = rep.omega / rep.steps as f64;
    let weight = 1.0 / rep.steps as f64;
    xs.iter()
        .map(|&x| {
            let ratio = Complex64::from_polar(1.0, dxi * x);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut phase = Complex64::new(1.0, 0.0);
            for l in 0..n {
                if l % PHASE_REFRESH_BLOCK == 0 {
                    phase = Complex64::from_polar(1.0, rep.xi[l] * x);
                }
                acc += rep.alpha[l] * phase;
                phase *= ratio;
            }
            acc * weight
        })
        .collect()
}

/// The copy centered on lattice site `n`: `W_n(x) = W_0(x - n a)`.
pub fn wannier_shifted(rep: &WannierRepresentation, site: i64, xs: &[f64]) -> Vec<Complex64> {
    let shift = site as f64 * rep.a;
    let shifted: Vec<f64> = xs.iter().map(|&x| x - shift).collect();
    evaluate_wannier(rep, &shifted)
}

/// Wannier center of the optimal gauge: `phi_zak a / (2 pi)`.
pub fn compute_center(phases: &GaugePhases, a: f64) -> f64 {
    phases.zak * a / (2.0 * std::f64::consts::PI)
}

/// Variance of the optimally gauged Wannier function:
/// `a^2/(2 pi) * integral |y'(k)|^2 dk` by composite trapezoid over the
/// stored derivative vectors (gauge-independent).
pub fn compute_variance(traj: &Trajectory) -> Result<f64> {
    if traj.derivatives.len() != traj.states.len() || traj.derivatives.is_empty() {
        return Err(SolverError::InvalidParameter(
            "trajectory carries no derivative vectors".into(),
        ));
    }
    let a = traj.lattice_constant();
    let norms: Vec<f64> = traj.derivatives.iter().map(|d| d.norm_squared()).collect();
    Ok(a * a / (2.0 * std::f64::consts::PI) * trapezoid(&traj.grid, &norms))
}

/// First and second moments from the corrected trajectory via the k-space
/// quadratures (valid for any localization-preserving gauge):
/// `<x> = a^2/(2 pi) * integral Re(i y~* y~') dk`,
/// `<x^2> = a^2/(2 pi) * integral |y~'|^2 dk`.
pub fn moments(gt: &GaugedTrajectory) -> Moments {
    let a = gt.lattice_constant();
    let scale = a * a / (2.0 * std::f64::consts::PI);
    let first: Vec<f64> = gt
        .states
        .iter()
        .zip(&gt.derivatives)
        .map(|(y, dy)| (Complex64::i() * y.dotc(dy)).re)
        .collect();
    let second: Vec<f64> = gt.derivatives.iter().map(|d| d.norm_squared()).collect();
    let center = scale * trapezoid(&gt.grid, &first);
    let second = scale * trapezoid(&gt.grid, &second);
    Moments {
        center,
        second,
        variance: second - center * center,
    }
}

fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(grid.len(), values.len());
    let mut acc = 0.0;
    for j in 0..grid.len() - 1 {
        acc += 0.5 * (grid[j + 1] - grid[j]) * (values[j] + values[j + 1]);
    }
    acc
}

/// Relative imaginary residual on the fixed 1000-point single-cell grid
/// `x_j = -a/2 + j a / 1000`: `max |Im W| / max |W|`.
pub fn imag_error(rep: &WannierRepresentation) -> f64 {
    let a = rep.a;
    let xs: Vec<f64> = (1..=1000)
        .map(|j| -a / 2.0 + j as f64 * a / 1000.0)
        .collect();
    let w = evaluate_wannier(rep, &xs);
    imag_ratio(&w)
}

fn imag_ratio(values: &[Complex64]) -> f64 {
    let max_abs = values.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if max_abs == 0.0 {
        return 0.0;
    }
    let max_im = values.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
    max_im / max_abs
}

/// Evaluate on a window and fit the decay of the oscillation envelope.
///
/// The envelope is the set of local maxima of `|W|` on the sample grid
/// (one per cell once the grid resolves the oscillation); windows with
/// fewer than four maxima are rejected as too narrow to fit.
pub fn decay_diagnostics(
    rep: &WannierRepresentation,
    window: (f64, f64),
    n_points: usize,
) -> Result<DecayDiagnostics> {
    if !(window.1 > window.0) || n_points < 8 {
        return Err(SolverError::InvalidParameter(format!(
            "bad decay window [{}, {}] with {n_points} points",
            window.0, window.1
        )));
    }
    let xs: Vec<f64> = (0..n_points)
        .map(|i| window.0 + (window.1 - window.0) * i as f64 / (n_points - 1) as f64)
        .collect();
    let w = evaluate_wannier(rep, &xs);
    let abs: Vec<f64> = w.iter().map(|z| z.norm()).collect();

    let mut envelope: Vec<(f64, f64)> = Vec::new();
    for i in 1..abs.len() - 1 {
        if abs[i] >= abs[i - 1] && abs[i] >= abs[i + 1] && abs[i] > 0.0 {
            envelope.push((xs[i], abs[i]));
        }
    }
    if envelope.len() < 4 {
        return Err(SolverError::InvalidParameter(format!(
            "window [{}, {}] contains only {} envelope maxima (need 4)",
            window.0,
            window.1,
            envelope.len()
        )));
    }

    let logs: Vec<(f64, f64)> = envelope.iter().map(|&(x, v)| (x, v.ln())).collect();
    let n = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in &logs {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    let decay_rate = num / den;

    let peak = envelope.iter().map(|p| p.1).fold(0.0f64, f64::max);
    let last = envelope.last().unwrap().1;
    Ok(DecayDiagnostics {
        imag_error: imag_ratio(&w),
        decay_rate,
        max_abs: abs.iter().copied().fold(0.0, f64::max),
        envelope_drop_decades: (peak / last).log10(),
    })
}

/// Synthetic representation for direct unit tests of the evaluation and
/// diagnostics paths.
#[cfg(test)]
pub(crate) fn synthetic_rep(
    a: f64,
    steps: usize,
    half_width: usize,
    alpha: Vec<Complex64>,
) -> WannierRepresentation {
    let omega = 2.0 * std::f64::consts::PI / a;
    let n = (2 * half_width + 1) * steps;
    assert_eq!(alpha.len(), n);
    let xi = (0..n)
        .map(|l| omega * (l as f64 / steps as f64 - (half_width as f64 + 0.5)))
        .collect();
    WannierRepresentation {
        a,
        omega,
        steps,
        half_width,
        xi,
        alpha,
        phases: GaugePhases {
            zak: 0.0,
            realty: 0.0,
            sign: 1.0,
            component_spread: 0.0,
        },
        boundary_mismatch: 0.0,
        conjugate_symmetry_residual: 0.0,
    }
}
