//! The k-dependent Fourier-domain operators of the Bloch eigenproblem.
//!
//! In the plane-wave basis `exp(i (k + m Omega) x)`, `m = -M..=M`, the
//! Bloch Hamiltonian is the dense Hermitian matrix `D(k) + V` with `D(k)`
//! the diagonal of squared shifted frequencies and `V` the Toeplitz
//! potential matrix. `S(k) = dD/dk` drives the transport right-hand side
//! and `Theta(k) = D(k) + V - E I` is the operator whose pseudoinverse is
//! applied at every stage.

use nalgebra::{DMatrix, DVector};

use crate::potential::PeriodicPotential;
use crate::tol::Tolerances;
use crate::Complex64;

/// Per-thread assembly workspace: dimensions, the precomputed potential
/// matrix, and the tolerance bundle threaded through the solver stages.
#[derive(Debug, Clone)]
pub struct OperatorWorkspace {
    a: f64,
    omega: f64,
    half_width: usize,
    potential_matrix: DMatrix<Complex64>,
    tol: Tolerances,
}

impl OperatorWorkspace {
    pub fn new(potential: &PeriodicPotential) -> Self {
        Self::with_tolerances(potential, Tolerances::default())
    }

    pub fn with_tolerances(potential: &PeriodicPotential, tol: Tolerances) -> Self {
        OperatorWorkspace {
            a: potential.lattice_constant(),
            omega: potential.reciprocal_period(),
            half_width: potential.half_width(),
            potential_matrix: potential.matrix(),
            tol,
        }
    }

    pub fn lattice_constant(&self) -> f64 {
        self.a
    }

    pub fn reciprocal_period(&self) -> f64 {
        self.omega
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Matrix dimension `2M + 1`.
    pub fn dim(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn potential_matrix(&self) -> &DMatrix<Complex64> {
        &self.potential_matrix
    }

    /// The one place the 0-based row index is mapped to a frequency:
    /// row `i` carries `k + (i - M) Omega`.
    #[inline]
    pub fn frequency(&self, row: usize, k: f64) -> f64 {
        k + (row as f64 - self.half_width as f64) * self.omega
    }

    /// Diagonal of the kinetic operator `D(k)`: `(k + (i - M) Omega)^2`.
    pub fn kinetic_diagonal(&self, k: f64) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| self.frequency(i, k).powi(2))
    }

    /// Diagonal of `S(k) = dD/dk`: `2 (k + (i - M) Omega)`.
    pub fn velocity_diagonal(&self, k: f64) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| 2.0 * self.frequency(i, k))
    }

    /// Dense Bloch Hamiltonian `D(k) + V`, Hermitian for real `k`.
    pub fn hamiltonian(&self, k: f64) -> DMatrix<Complex64> {
        let mut h = self.potential_matrix.clone();
        for i in 0..self.dim() {
            h[(i, i)] += Complex64::new(self.frequency(i, k).powi(2), 0.0);
        }
        h
    }

    /// Shifted operator `Theta(k) = D(k) + V - E I`.
    pub fn shifted_operator(&self, k: f64, energy: f64) -> DMatrix<Complex64> {
        let mut theta = self.hamiltonian(k);
        for i in 0..self.dim() {
            theta[(i, i)] -= Complex64::new(energy, 0.0);
        }
        theta
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        // Hermiticity of the assembled operators for arbitrary real k.
        #[test]
        fn hamiltonian_hermitian(k in -5.0f64..5.0, e in -3.0f64..3.0) {
            let pot = PeriodicPotential::asym_exp(2.0 * std::f64::consts::PI, 8).unwrap();
            let ws = OperatorWorkspace::new(&pot);
            for m in [ws.hamiltonian(k), ws.shifted_operator(k, e)] {
                let scale = m.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
                let adj = m.adjoint();
                for (x, y) in m.iter().zip(adj.iter()) {
                    prop_assert!((x - y).norm() <= 1e-14 * scale);
                }
            }
        }
    }
}
