//! Shared setup for the solver benchmarks.

use wannier1d::{KConvention, PotentialSpec, RunConfig, Tolerances};

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// The reference configuration most benchmarks start from.
pub fn gaussian_config(band: usize, k_points: usize) -> RunConfig {
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
