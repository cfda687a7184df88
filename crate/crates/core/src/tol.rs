//! Numerical tolerances with their rationale, overridable per run.

use serde::{Deserialize, Serialize};

/// Relative eigenvalue gap below which a band is treated as degenerate.
/// Below the ODE tolerance, above roundoff.
pub const GAP_TOL: f64 = 1e-8;

/// Relative floor for the second-smallest singular value of the shifted
/// operator; below this the pseudoinverse direction is meaningless.
pub const COND_TOL: f64 = 1e-10;

/// Allowed drift of the squared state norm away from `1/a` before the
/// integrator renormalizes (exact transport conserves the norm).
pub const DRIFT_TOL: f64 = 1e-10;

/// Orthogonality ceiling for `|y* y'|` relative to `|y| |y'|`.
pub const ORTHO_TOL: f64 = 1e-10;

/// Relative eigensolve residual accepted at state construction.
pub const EIG_RESIDUAL_TOL: f64 = 1e-12;

/// Phase-extraction products below `RELIABLE_PRODUCT / a` are discarded;
/// if all components fall below it the extraction fails.
pub const RELIABLE_PRODUCT: f64 = 1e-12;

/// Components with product magnitude below this fraction of the largest
/// product are excluded from the per-component spread diagnostic (tiny
/// truncation-edge components carry meaningless phases).
pub const ADMISSIBLE_FRACTION: f64 = 1e-2;

/// Minimum overlap between neighboring eigenvectors for discrete transport.
pub const NEIGHBOR_OVERLAP_TOL: f64 = 1e-8;

/// Per-component agreement expected of the extracted Zak phase.
pub const SPREAD_TOL: f64 = 1e-6;

/// Shifted-periodicity residual above which a trajectory is rejected when
/// unfolding (gauge not applied, or wrong band).
pub const SHIFT_PERIODICITY_LIMIT: f64 = 1e-4;

/// Tolerance bundle threaded through the solver; fields default to the
/// constants above and can be overridden from the CLI or a config file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub gap: f64,
    pub cond: f64,
    pub drift: f64,
    pub eig_residual: f64,
    pub reliable_product: f64,
    pub neighbor_overlap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gap: GAP_TOL,
            cond: COND_TOL,
            drift: DRIFT_TOL,
            eig_residual: EIG_RESIDUAL_TOL,
            reliable_product: RELIABLE_PRODUCT,
            neighbor_overlap: NEIGHBOR_OVERLAP_TOL,
        }
    }
}
