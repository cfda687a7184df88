//! Small angle utilities shared by the gauge module.

use crate::Complex64;

/// Wrap an angle into `(-pi, pi]`.
pub(crate) fn wrap_angle(mut phi: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    phi = phi.rem_euclid(two_pi);
    if phi > std::f64::consts::PI {
        phi -= two_pi;
    }
    phi
}

/// Smallest signed difference `a - b` between two angles, in `(-pi, pi]`.
pub(crate) fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

/// Magnitude-weighted circular mean of the arguments of `terms`, together
/// with the maximum angular deviation of the admissible terms from it.
///
/// Terms with magnitude below `floor` are ignored entirely; terms below
/// `admissible_fraction` of the largest magnitude are excluded from the
/// spread (their phases are noise) but still contribute their weight to
/// the mean. Returns `None` when every term is below the floor.
pub(crate) fn circular_mean(
    terms: &[Complex64],
    floor: f64,
    admissible_fraction: f64,
) -> Option<(f64, f64, f64)> {
    let max_mag = terms.iter().map(|t| t.norm()).fold(0.0f64, f64::max);
    if max_mag < floor {
        return None;
    }
    let sum: Complex64 = terms.iter().filter(|t| t.norm() >= floor).sum();
    let mean = sum.arg();
    let admissible = max_mag * admissible_fraction;
    let spread = terms
        .iter()
        .filter(|t| t.norm() >= admissible)
        .map(|t| angle_diff(t.arg(), mean).abs())
        .fold(0.0f64, f64::max);
    Some((mean, spread, max_mag))
}
