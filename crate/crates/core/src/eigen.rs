//! Direct Hermitian eigensolves of the discretized Bloch Hamiltonian.
//!
//! Used for the initial condition of the transport ODE, for the endpoint
//! comparison, and as the reference whenever an independent solve at a
//! single quasimomentum is needed.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SolverError};
use crate::operator::OperatorWorkspace;
use crate::Complex64;

/// A point on a band: quasimomentum, energy, and the Fourier coefficient
/// vector of the periodic Bloch factor, normalized to `|y|^2 = 1/a`.
///
/// The overall phase of `coeffs` is unspecified here; the gauge module
/// fixes it later.
#[derive(Debug, Clone, PartialEq)]
pub struct BandState {
    pub k: f64,
    pub energy: f64,
    pub coeffs: DVector<Complex64>,
}

impl BandState {
    /// Squared-norm deviation from the `1/a` normalization.
    pub fn norm_drift(&self, a: f64) -> f64 {
        (self.coeffs.norm_squared() - 1.0 / a).abs()
    }
}

/// Full spectrum of `D(k) + V`: energies in nondecreasing order with the
/// matching unit eigenvectors.
pub fn eigen_system(ws: &OperatorWorkspace, k: f64) -> (Vec<f64>, Vec<DVector<Complex64>>) {
    let h = ws.hamiltonian(k);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let energies: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors: Vec<DVector<Complex64>> = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (energies, vectors)
}

/// Eigenpair of the band with 1-based index `band` at quasimomentum `k`.
///
/// Fails with [`SolverError::DegenerateBand`] when the relative gap between
/// the selected eigenvalue and its nearest neighbor falls below the gap
/// tolerance — the isolated-band assumption underpinning the whole
/// construction is then violated.
pub fn band_eigenpair(ws: &OperatorWorkspace, k: f64, band: usize) -> Result<BandState> {
    if band == 0 {
        return Err(SolverError::InvalidParameter(
            "band index is 1-based and must be at least 1".into(),
        ));
    }
    if band > ws.dim() {
        return Err(SolverError::InvalidParameter(format!(
            "band {band} not resolvable with dimension {} (increase M)",
            ws.dim()
        )));
    }
    let (energies, mut vectors) = eigen_system(ws, k);
    let idx = band - 1;
    let scale = energies
        .first()
        .unwrap()
        .abs()
        .max(energies.last().unwrap().abs())
        .max(f64::MIN_POSITIVE);
    let mut gap = f64::INFINITY;
    if idx > 0 {
        gap = gap.min(energies[idx] - energies[idx - 1]);
    }
    if idx + 1 < energies.len() {
        gap = gap.min(energies[idx + 1] - energies[idx]);
    }
    let tol = ws.tolerances().gap;
    if gap / scale < tol {
        return Err(SolverError::DegenerateBand {
            band,
            k,
            gap: gap / scale,
            tol,
        });
    }

    let mut y = std::mem::take(&mut vectors[idx]);
    let norm = y.norm();
    y.scale_mut(1.0 / (norm * ws.lattice_constant().sqrt()));

    let state = BandState {
        k,
        energy: energies[idx],
        coeffs: y,
    };
    let residual = (&ws.hamiltonian(k) * &state.coeffs - state.coeffs.scale(state.energy)).norm();
    let h_scale = energies.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    if residual > ws.tolerances().eig_residual * h_scale * state.coeffs.norm() * 1e2 {
        return Err(SolverError::Numerical(format!(
            "eigensolve residual {residual:.3e} too large at k = {k:.6e}"
        )));
    }
    Ok(state)
}

/// Rayleigh quotient `y* (D(k) + V) y / (y* y)`.
///
/// Exact for exact eigenvectors; the error is quadratic in the eigenvector
/// error, which is why the transport stage uses it to refresh the energy.
pub fn rayleigh_quotient(ws: &OperatorWorkspace, k: f64, y: &DVector<Complex64>) -> Result<f64> {
    let nsq = y.norm_squared();
    if nsq == 0.0 || !nsq.is_finite() {
        return Err(SolverError::InvalidParameter(
            "Rayleigh quotient of the zero vector".into(),
        ));
    }
    let h = ws.hamiltonian(k);
    Ok(rayleigh_quotient_with(&h, y, nsq))
}

/// Rayleigh quotient with a pre-assembled Hamiltonian.
pub(crate) fn rayleigh_quotient_with(
    h: &DMatrix<Complex64>,
    y: &DVector<Complex64>,
    norm_squared: f64,
) -> f64 {
    let hy = h * y;
    y.dotc(&hy).re / norm_squared
}
