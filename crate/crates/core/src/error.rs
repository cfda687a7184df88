//! Error type shared by all solver stages.

use thiserror::Error;

/// Errors surfaced by the solver.
#[derive(Debug, Clone, Error)]
pub enum SolverError {
    /// A precondition on user input was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested band is not isolated at some quasimomentum: the
    /// relative gap to a neighboring eigenvalue fell below the tolerance.
    #[error("band {band} degenerate at k = {k:.9e}: relative gap {gap:.3e} < {tol:.3e}")]
    DegenerateBand {
        band: usize,
        k: f64,
        gap: f64,
        tol: f64,
    },

    /// The shifted operator is numerically rank-deficient beyond the single
    /// expected near-null mode, signalling a near-degeneracy mid-zone.
    #[error(
        "transport operator ill-conditioned at k = {k:.9e}: \
         second-smallest singular value {sigma:.3e} (relative) < {tol:.3e}"
    )]
    IllConditioned { k: f64, sigma: f64, tol: f64 },

    /// Two neighboring eigenvectors on the grid were nearly orthogonal, so
    /// the discrete phase alignment is unreliable (grid too coarse).
    #[error(
        "neighboring eigenvectors nearly orthogonal at k = {k:.9e}: |overlap| = {overlap:.3e}"
    )]
    OrthogonalNeighbors { k: f64, overlap: f64 },

    /// No coefficient pair had a large enough product to extract a phase.
    #[error(
        "no reliable component for phase extraction: max product {max_product:.3e} < {floor:.3e}"
    )]
    NoReliableComponent { max_product: f64, floor: f64 },

    /// A gauge-corrected trajectory failed the shifted-periodicity check,
    /// typically because the gauge was not applied or the band is wrong.
    #[error("shifted-periodicity residual {residual:.3e} exceeds {limit:.3e}; gauge not applied?")]
    NotShiftPeriodic { residual: f64, limit: f64 },

    /// An internal numerical routine failed to meet its contract.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Configuration or file-format problem in the run harness.
    #[error("config: {0}")]
    Config(String),

    /// Filesystem error while reading inputs or writing outputs.
    #[error("i/o: {0}")]
    Io(String),
}

impl SolverError {
    /// Stable machine-readable tag for CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            SolverError::InvalidParameter(_) => "invalid-parameter",
            SolverError::DegenerateBand { .. } => "degenerate-band",
            SolverError::IllConditioned { .. } => "ill-conditioned",
            SolverError::OrthogonalNeighbors { .. } => "orthogonal-neighbors",
            SolverError::NoReliableComponent { .. } => "no-reliable-component",
            SolverError::NotShiftPeriodic { .. } => "not-shift-periodic",
            SolverError::Numerical(_) => "numerical",
            SolverError::Config(_) => "config",
            SolverError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for SolverError {
    fn from(e: std::io::Error) -> Self {
        SolverError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SolverError>;
