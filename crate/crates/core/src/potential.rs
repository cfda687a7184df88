//! Periodic potentials and their truncated Fourier interpolants.
//!
//! A potential enters the solver only through the `2M + 1` Fourier
//! coefficients of its trigonometric interpolant on the uniform cell grid,
//! and through the Toeplitz matrix those coefficients generate.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SolverError};
use crate::Complex64;

/// How a potential was supplied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PotentialSource {
    /// One of the named builtin potentials.
    Builtin(String),
    /// Explicit cosine/sine coefficient lists.
    Coefficients,
    /// Real samples on the uniform cell grid.
    Samples,
}

/// A real, `a`-periodic potential truncated to `2M + 1` Fourier modes.
///
/// Coefficients are stored center-indexed, `j = -M..=M` at slot `j + M`;
/// the interpolant is `V(x) = sum_j c_j exp(i j Omega x)`. Hermitian
/// symmetry `c_{-j} = conj(c_j)` holds exactly by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPotential {
    a: f64,
    omega: f64,
    half_width: usize,
    coeffs: Vec<Complex64>,
    source: PotentialSource,
}

/// Uniform sampling abscissae for the Fourier interpolant:
/// `t_j = -a/2 + (j - 1) a / (2M + 1)`, `j = 1..=2M+1`, spacing `a/(2M+1)`.
pub fn sample_grid(a: f64, half_width: usize) -> Result<Vec<f64>> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(SolverError::InvalidParameter(format!(
            "lattice constant must be positive and finite, got {a}"
        )));
    }
    if half_width == 0 {
        return Err(SolverError::InvalidParameter(
            "truncation half-width M must be at least 1".into(),
        ));
    }
    let n = 2 * half_width + 1;
    Ok((0..n).map(|j| a * (j as f64 / n as f64 - 0.5)).collect())
}

/// Discrete Fourier analysis of an odd number of real samples taken on the
/// [`sample_grid`] abscissae.
///
/// Returns the `2M + 1` coefficients `c_{-M}..=c_M` of the trigonometric
/// interpolant, normalized so that `sum_j c_j exp(i j Omega t_l)`
/// reproduces the samples. The `1/(2M+1)` scaling sits on this analysis
/// step. Hermitian symmetry is enforced exactly by pairwise averaging,
/// which moves each coefficient by at most roundoff for real input.
pub fn fourier_coefficients(samples: &[f64]) -> Result<Vec<Complex64>> {
    if samples.len() < 3 || samples.len() % 2 == 0 {
        return Err(SolverError::InvalidParameter(format!(
            "sample count must be odd and at least 3, got {}",
            samples.len()
        )));
    }
    let n = samples.len();
    let half_width = (n - 1) / 2;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for j in -(half_width as i64)..=(half_width as i64) {
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, &v) in samples.iter().enumerate() {
            // Omega * t_l = 2 pi (l/n - 1/2), independent of a.
            let angle = -(j as f64) * 2.0 * std::f64::consts::PI * (l as f64 / n as f64 - 0.5);
            acc += v * Complex64::from_polar(1.0, angle);
        }
        coeffs[(j + half_width as i64) as usize] = acc / n as f64;
    }
    for j in 0..half_width {
        let mirror = n - 1 - j;
        let sym = 0.5 * (coeffs[j] + coeffs[mirror].conj());
        coeffs[j] = sym;
        coeffs[mirror] = sym.conj();
    }
    coeffs[half_width] = Complex64::new(coeffs[half_width].re, 0.0);
    Ok(coeffs)
}

impl PeriodicPotential {
    fn from_parts(
        a: f64,
        half_width: usize,
        coeffs: Vec<Complex64>,
        source: PotentialSource,
    ) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(SolverError::InvalidParameter(format!(
                "lattice constant must be positive and finite, got {a}"
            )));
        }
        debug_assert_eq!(coeffs.len(), 2 * half_width + 1);
        Ok(PeriodicPotential {
            a,
            omega: 2.0 * std::f64::consts::PI / a,
            half_width,
            coeffs,
            source,
        })
    }

    /// Build from real samples on the [`sample_grid`] abscissae.
    pub fn from_samples(a: f64, samples: &[f64]) -> Result<Self> {
        let coeffs = fourier_coefficients(samples)?;
        let half_width = (samples.len() - 1) / 2;
        Self::from_parts(a, half_width, coeffs, PotentialSource::Samples)
    }

    /// Sample a closure on the interpolation grid and build the interpolant.
    pub fn from_function<F: Fn(f64) -> f64>(a: f64, half_width: usize, f: F) -> Result<Self> {
        let grid = sample_grid(a, half_width)?;
        let samples: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
        let coeffs = fourier_coefficients(&samples)?;
        Self::from_parts(a, half_width, coeffs, PotentialSource::Samples)
    }

    /// Build from cosine/sine coefficient lists:
    /// `V(x) = cos[0] + sum_{j>=1} cos[j] cos(j Omega x) + sin[j-1] sin(j Omega x)`.
    ///
    /// The lists must fit inside the truncation (`len - 1 <= M` for cosines,
    /// `len <= M` for sines); silently aliasing them would change the
    /// potential.
    pub fn from_cos_sin(a: f64, half_width: usize, cos: &[f64], sin: &[f64]) -> Result<Self> {
        if half_width == 0 {
            return Err(SolverError::InvalidParameter(
                "truncation half-width M must be at least 1".into(),
            ));
        }
        if cos.len() > half_width + 1 || sin.len() > half_width {
            return Err(SolverError::InvalidParameter(format!(
                "coefficient lists exceed truncation: {} cosines / {} sines with M = {}",
                cos.len(),
                sin.len(),
                half_width
            )));
        }
        let n = 2 * half_width + 1;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        if let Some(&c0) = cos.first() {
            coeffs[half_width] = Complex64::new(c0, 0.0);
        }
        for (j, &c) in cos.iter().enumerate().skip(1) {
            coeffs[half_width + j] += Complex64::new(0.5 * c, 0.0);
            coeffs[half_width - j] += Complex64::new(0.5 * c, 0.0);
        }
        for (idx, &s) in sin.iter().enumerate() {
            let j = idx + 1;
            coeffs[half_width + j] += Complex64::new(0.0, -0.5 * s);
            coeffs[half_width - j] += Complex64::new(0.0, 0.5 * s);
        }
        Self::from_parts(a, half_width, coeffs, PotentialSource::Coefficients)
    }

    /// Named builtin potentials: `gaussian5` and `asym-exp`.
    pub fn builtin(name: &str, a: f64, half_width: usize) -> Result<Self> {
        match name {
            "gaussian5" => Self::gaussian5(a, half_width),
            "asym-exp" => Self::asym_exp(a, half_width),
            other => Err(SolverError::Config(format!(
                "unknown builtin potential {other:?} (expected \"gaussian5\" or \"asym-exp\")"
            ))),
        }
    }

    /// Sum of five Gaussian-weighted cosines over a constant offset:
    /// `V(x) = -1/2 - sum_{j=1}^{5} exp(-j^2/4) cos(j Omega x)`.
    pub fn gaussian5(a: f64, half_width: usize) -> Result<Self> {
        let omega = 2.0 * std::f64::consts::PI / a;
        let mut pot = Self::from_function(a, half_width, |x| {
            let mut v = -0.5;
            for j in 1..=5 {
                v -= (-(j as f64).powi(2) / 4.0).exp() * (j as f64 * omega * x).cos();
            }
            v
        })?;
        pot.source = PotentialSource::Builtin("gaussian5".into());
        Ok(pot)
    }

    /// Smooth asymmetric potential
    /// `V(x) = (1 + 2 sin(2 Omega x) + 3 exp(cos(Omega x))) / 4`.
    pub fn asym_exp(a: f64, half_width: usize) -> Result<Self> {
        let omega = 2.0 * std::f64::consts::PI / a;
        let mut pot = Self::from_function(a, half_width, |x| {
            0.25 * (1.0 + 2.0 * (2.0 * omega * x).sin() + 3.0 * (omega * x).cos().exp())
        })?;
        pot.source = PotentialSource::Builtin("asym-exp".into());
        Ok(pot)
    }

    pub fn lattice_constant(&self) -> f64 {
        self.a
    }

    /// Reciprocal period `Omega = 2 pi / a`.
    pub fn reciprocal_period(&self) -> f64 {
        self.omega
    }

    /// Truncation half-width `M`.
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn source(&self) -> &PotentialSource {
        &self.source
    }

    /// All coefficients, center-indexed `-M..=M`.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient `c_j`; zero outside the truncation.
    pub fn coefficient(&self, j: i64) -> Complex64 {
        let m = self.half_width as i64;
        if j.abs() > m {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(j + m) as usize]
        }
    }

    /// Evaluate the interpolant `sum_j c_j exp(i j Omega x)`.
    ///
    /// The imaginary part cancels by Hermitian symmetry; only the real part
    /// is returned.
    pub fn value(&self, x: f64) -> f64 {
        let m = self.half_width as i64;
        let mut acc = self.coeffs[self.half_width].re;
        for j in 1..=m {
            let phase = Complex64::from_polar(1.0, j as f64 * self.omega * x);
            acc += 2.0 * (self.coeffs[(j + m) as usize] * phase).re;
        }
        acc
    }

    /// Dense Toeplitz potential matrix `V[m, n] = c_{m-n}` (zero where
    /// `|m - n| > M`), Hermitian by coefficient symmetry.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let n = 2 * self.half_width + 1;
        DMatrix::from_fn(n, n, |r, c| self.coefficient(r as i64 - c as i64))
    }

    /// Decay diagnostic: `env[j] = max_{j' >= j} |c_{j'}|` for `j = 1..=M`.
    ///
    /// The envelope is nonincreasing by construction; how fast it falls is
    /// the smoothness indicator reported for sampled potentials (nothing is
    /// enforced — rough samples simply produce a flat envelope).
    pub fn decay_envelope(&self) -> Vec<f64> {
        let m = self.half_width as i64;
        let mags: Vec<f64> = (1..=m)
            .map(|j| self.coefficient(j).norm().max(self.coefficient(-j).norm()))
            .collect();
        let mut env = mags;
        for j in (0..env.len().saturating_sub(1)).rev() {
            env[j] = env[j].max(env[j + 1]);
        }
        env
    }
}
