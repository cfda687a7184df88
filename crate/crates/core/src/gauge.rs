//! Phase extraction and the optimal linear Berry-phase gauge.
//!
//! A transported trajectory returns to the right zone edge equal to the
//! shifted initial vector up to a single unimodular factor, the Zak phase.
//! Applying the constant-connection gauge `exp(-i phi_zak k / Omega)`
//! together with a constant realty phase `exp(-i phi_0)` makes the unfolded
//! coefficient function analytic and conjugate-symmetric, which is exactly
//! what exponential localization and realty of the Wannier function need.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::phase::{circular_mean, wrap_angle};
use crate::tol::ADMISSIBLE_FRACTION;
use crate::transport::Trajectory;
use crate::Complex64;

/// The analytically extracted correction phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugePhases {
    /// Zak phase in `(-pi, pi]`; fixes the zone-boundary jump and the
    /// Wannier center `phi_zak a / (2 pi)`.
    pub zak: f64,
    /// Realty half-phase in `(-pi/2, pi/2]`, defined mod pi.
    pub realty: f64,
    /// Resolves the mod-pi branch of `realty`: +1 or -1, chosen so the
    /// synthesized Wannier function is positive at its peak.
    pub sign: f64,
    /// Largest angular deviation of any admissible per-component phase
    /// estimate from the aggregated value.
    pub component_spread: f64,
}

/// Estimate returned by the phase extractors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseEstimate {
    pub angle: f64,
    pub spread: f64,
}

/// Zak phase from the trajectory endpoints.
///
/// Every component pair `(y_end[m], y_start[m+1])` estimates the same
/// phase; the estimates are combined by a magnitude-weighted circular mean
/// over products above `floor`, and the spread of the admissible ones is
/// reported.
pub fn extract_zak_phase(
    y_start: &DVector<Complex64>,
    y_end: &DVector<Complex64>,
    floor: f64,
) -> Result<PhaseEstimate> {
    let n = y_start.len();
    let products: Vec<Complex64> = (0..n - 1)
        .map(|m| y_end[m] * y_start[m + 1].conj())
        .collect();
    match circular_mean(&products, floor, ADMISSIBLE_FRACTION) {
        Some((angle, spread, _)) => Ok(PhaseEstimate { angle, spread }),
        None => Err(SolverError::NoReliableComponent {
            max_product: products.iter().map(|p| p.norm()).fold(0.0, f64::max),
            floor,
        }),
    }
}

/// Realty phase from the trajectory endpoints.
///
/// The realty condition reads `exp(-i phi_0) y_start[m] =
/// exp(i phi_0) conj(y_end[rev(m)])` with `rev` the index reversal, so
/// `exp(2 i phi_0)` is estimated from the products
/// `y_start[m] * y_end[rev(m)]` and halved; the branch lands in
/// `(-pi/2, pi/2]`.
pub fn extract_realty_phase(
    y_start: &DVector<Complex64>,
    y_end: &DVector<Complex64>,
    floor: f64,
) -> Result<PhaseEstimate> {
    let n = y_start.len();
    let products: Vec<Complex64> = (0..n).map(|m| y_start[m] * y_end[n - 1 - m]).collect();
    match circular_mean(&products, floor, ADMISSIBLE_FRACTION) {
        Some((doubled, spread, _)) => Ok(PhaseEstimate {
            angle: 0.5 * doubled,
            spread: 0.5 * spread,
        }),
        None => Err(SolverError::NoReliableComponent {
            max_product: products.iter().map(|p| p.norm()).fold(0.0, f64::max),
            floor,
        }),
    }
}

/// Extract both correction phases from a trajectory.
pub fn extract_phases(traj: &Trajectory, reliable_product: f64) -> Result<GaugePhases> {
    let y_start = &traj.states.first().unwrap().coeffs;
    let y_end = &traj.states.last().unwrap().coeffs;
    let floor = reliable_product / traj.lattice_constant();
    let zak = extract_zak_phase(y_start, y_end, floor)?;
    let realty = extract_realty_phase(y_start, y_end, floor)?;
    Ok(GaugePhases {
        zak: wrap_angle(zak.angle),
        realty: realty.angle,
        sign: 1.0,
        component_spread: zak.spread.max(realty.spread),
    })
}

/// Gauge family used to probe the variance penalty: Berry connection
/// `phi'(k) = (phi_zak + 2 pi n)/Omega + sum_m c_m exp(i m a k)` with
/// Hermitian coefficients `c_{-m} = conj(c_m)` so the phase stays real.
///
/// Only the coefficients for `m >= 1` are stored; the mirror terms are
/// implied.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedGauge {
    branch: i64,
    coeffs: Vec<(usize, Complex64)>,
}

impl PerturbedGauge {
    pub fn new(branch: i64, coeffs: Vec<(usize, Complex64)>) -> Result<Self> {
        if coeffs.iter().any(|&(m, _)| m == 0) {
            return Err(SolverError::InvalidParameter(
                "perturbed-gauge coefficients start at m = 1 (m = 0 is the branch term)".into(),
            ));
        }
        Ok(PerturbedGauge { branch, coeffs })
    }

    pub fn branch(&self) -> i64 {
        self.branch
    }

    /// `sum_{m != 0} |c_m|^2`, the exact variance penalty of this gauge.
    pub fn penalty(&self) -> f64 {
        2.0 * self.coeffs.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>()
    }

    /// Berry connection `phi'(k)` relative to the optimal one.
    fn connection(&self, zak: f64, omega: f64, a: f64, k: f64) -> f64 {
        let mut phi = (zak + 2.0 * std::f64::consts::PI * self.branch as f64) / omega;
        for &(m, c) in &self.coeffs {
            phi += 2.0 * (c * Complex64::from_polar(1.0, m as f64 * a * k)).re;
        }
        phi
    }

    /// Berry phase `phi(k)`, normalized to coincide with the optimal gauge
    /// when `n = 0` and all `c_m` vanish.
    fn phase(&self, zak: f64, omega: f64, a: f64, k: f64) -> f64 {
        let mut phi = (zak + 2.0 * std::f64::consts::PI * self.branch as f64) * k / omega;
        for &(m, c) in &self.coeffs {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let z = c * (Complex64::from_polar(1.0, m as f64 * a * k) - sign);
            phi += 2.0 * z.im / (m as f64 * a);
        }
        phi
    }
}

/// A trajectory after gauge correction: states `y~`, their derivatives
/// `y~' = exp(-i phi)(y' - i phi' y)`, and the connection values used.
#[derive(Debug, Clone)]
pub struct GaugedTrajectory {
    a: f64,
    omega: f64,
    band: usize,
    pub grid: Vec<f64>,
    pub states: Vec<DVector<Complex64>>,
    pub derivatives: Vec<DVector<Complex64>>,
    pub connection: Vec<f64>,
    pub phases: GaugePhases,
}

impl GaugedTrajectory {
    pub fn lattice_constant(&self) -> f64 {
        self.a
    }

    pub fn reciprocal_period(&self) -> f64 {
        self.omega
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    /// `|y~(start) - R(y~(end))|` over the `2M` components the truncated
    /// right shift relates (the two edge components have no partner and sit
    /// at the coefficient-decay floor).
    pub fn shift_periodicity_residual(&self) -> f64 {
        let start = self.states.first().unwrap();
        let end = self.states.last().unwrap();
        let mut acc = 0.0;
        for i in 1..start.len() {
            acc += (start[i] - end[i - 1]).norm_sqr();
        }
        acc.sqrt()
    }

    /// Largest entrywise violation of `alpha~(xi) = conj(alpha~(-xi))`,
    /// checked as `y~_m(k_j) = conj(y~_rev(m)(k_{K-j}))` on the full grid.
    pub fn conjugate_symmetry_residual(&self) -> f64 {
        let steps = self.steps();
        let n = self.states[0].len();
        let mut max_dev: f64 = 0.0;
        for j in 0..=steps {
            let here = &self.states[j];
            let mirror = &self.states[steps - j];
            for i in 0..n {
                max_dev = max_dev.max((here[i] - mirror[n - 1 - i].conj()).norm());
            }
        }
        max_dev
    }

    /// Largest deviation of the Berry connection identity
    /// `i y~* y~' = phi'(k) / a` at interior nodes.
    pub fn berry_connection_residual(&self) -> f64 {
        let mut max_dev: f64 = 0.0;
        for j in 1..self.steps() {
            let inner = self.states[j].dotc(&self.derivatives[j]);
            let lhs = Complex64::i() * inner;
            let rhs = Complex64::new(self.connection[j] / self.a, 0.0);
            max_dev = max_dev.max((lhs - rhs).norm());
        }
        max_dev
    }

    /// Flip the overall sign of the corrected states (the mod-pi branch of
    /// the realty phase).
    pub fn negate(&mut self) {
        for s in &mut self.states {
            for v in s.iter_mut() {
                *v = -*v;
            }
        }
        for d in &mut self.derivatives {
            for v in d.iter_mut() {
                *v = -*v;
            }
        }
        self.phases.sign = -self.phases.sign;
    }
}

fn apply_with(
    traj: &Trajectory,
    phases: &GaugePhases,
    phase_at: impl Fn(f64) -> f64,
    connection_at: impl Fn(f64) -> f64,
) -> GaugedTrajectory {
    let base = Complex64::from_polar(phases.sign, -phases.realty);
    let mut states = Vec::with_capacity(traj.states.len());
    let mut derivatives = Vec::with_capacity(traj.states.len());
    let mut connection = Vec::with_capacity(traj.states.len());
    for (state, dy) in traj.states.iter().zip(&traj.derivatives) {
        let k = state.k;
        let factor = base * Complex64::from_polar(1.0, -phase_at(k));
        let phi_prime = connection_at(k);
        states.push(state.coeffs.map(|c| c * factor));
        let rot = Complex64::new(0.0, -phi_prime);
        derivatives.push(DVector::from_fn(dy.len(), |i, _| {
            factor * (dy[i] + rot * state.coeffs[i])
        }));
        connection.push(phi_prime);
    }
    GaugedTrajectory {
        a: traj.lattice_constant(),
        omega: traj.reciprocal_period(),
        band: traj.band(),
        grid: traj.grid.clone(),
        states,
        derivatives,
        connection,
        phases: *phases,
    }
}

/// Apply the optimal gauge `y~ = sign * exp(-i phi_0) exp(-i phi_zak k / Omega) y`.
///
/// Norms are untouched; after correction the endpoints satisfy the
/// shifted-periodicity relation and the Berry connection is the constant
/// `phi_zak / Omega`.
pub fn apply_gauge(traj: &Trajectory, phases: &GaugePhases) -> GaugedTrajectory {
    let omega = traj.reciprocal_period();
    let zak = phases.zak;
    apply_with(traj, phases, |k| zak * k / omega, |_| zak / omega)
}

/// Apply a perturbed localization-preserving gauge (test surface for the
/// variance penalty; reduces to [`apply_gauge`] for `n = 0`, no
/// coefficients).
pub fn apply_perturbed_gauge(
    traj: &Trajectory,
    phases: &GaugePhases,
    pert: &PerturbedGauge,
) -> GaugedTrajectory {
    let omega = traj.reciprocal_period();
    let a = traj.lattice_constant();
    let zak = phases.zak;
    apply_with(
        traj,
        phases,
        |k| pert.phase(zak, omega, a, k),
        |k| pert.connection(zak, omega, a, k),
    )
}
