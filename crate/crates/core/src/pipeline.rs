//! End-to-end pipeline, experiment reproduction, and serialization.
//!
//! A [`RunConfig`] fixes the potential, truncation, k-resolution, band and
//! output grid; [`run_pipeline`] executes the six construction stages and
//! returns every intermediate product plus a [`RunRecord`] of metrics and
//! timings. [`convergence_study`] sweeps the k-resolution (or the spatial
//! truncation) and tabulates errors per band, the layout used by the
//! convergence experiments.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::eigen::band_eigenpair;
use crate::error::{Result, SolverError};
use crate::gauge::{apply_gauge, extract_phases, GaugedTrajectory};
use crate::operator::OperatorWorkspace;
use crate::potential::PeriodicPotential;
use crate::tol::Tolerances;
use crate::transport::{endpoint_comparison, integrate_band, Trajectory};
use crate::wannier::{
    assemble_alpha, compute_center, compute_variance, evaluate_wannier, moments,
    WannierRepresentation,
};
use crate::Complex64;

/// How the configured `K` maps to RK4 steps.
///
/// Table rows label `K` as the number of grid points including both zone
/// edges (spacing `Omega/(K-1)`, hence `K - 1` steps); `steps` takes the
/// number literally as the step count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KConvention {
    #[default]
    Paper,
    Steps,
}

/// Real-space output grid specification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl XGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.min + i as f64 * h).collect()
    }
}

/// Potential selection: named builtins, explicit cosine/sine lists, or a
/// file of `2M + 1` samples on the interpolation grid (one value per line).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialSpec {
    Gaussian5,
    AsymExp,
    Coefficients {
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    Samples {
        path: PathBuf,
    },
}

impl PotentialSpec {
    /// Parse a CLI argument: a builtin name or a path (`.json` holds a
    /// serialized potential description, anything else is a samples file).
    pub fn parse(arg: &str) -> Result<Self> {
        match arg {
            "gaussian5" => Ok(PotentialSpec::Gaussian5),
            "asym-exp" => Ok(PotentialSpec::AsymExp),
            other => {
                let path = PathBuf::from(other);
                if path.extension().and_then(|e| e.to_str()) == Some("json") {
                    let text = fs::read_to_string(&path)
                        .map_err(|e| SolverError::Config(format!("reading {other}: {e}")))?;
                    serde_json::from_str(&text)
                        .map_err(|e| SolverError::Config(format!("parsing {other}: {e}")))
                } else {
                    Ok(PotentialSpec::Samples { path })
                }
            }
        }
    }

    pub fn build(&self, a: f64, half_width: usize) -> Result<PeriodicPotential> {
        match self {
            PotentialSpec::Gaussian5 => PeriodicPotential::gaussian5(a, half_width),
            PotentialSpec::AsymExp => PeriodicPotential::asym_exp(a, half_width),
            PotentialSpec::Coefficients { cos, sin } => {
                PeriodicPotential::from_cos_sin(a, half_width, cos, sin)
            }
            PotentialSpec::Samples { path } => {
                let text = fs::read_to_string(path).map_err(|e| {
                    SolverError::Config(format!("reading samples {}: {e}", path.display()))
                })?;
                let samples: Vec<f64> = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(|l| {
                        l.parse::<f64>()
                            .map_err(|e| SolverError::Config(format!("bad sample line {l:?}: {e}")))
                    })
                    .collect::<Result<_>>()?;
                let expected = 2 * half_width + 1;
                if samples.len() != expected {
                    return Err(SolverError::Config(format!(
                        "samples file {} holds {} values, expected 2M+1 = {expected}",
                        path.display(),
                        samples.len()
                    )));
                }
                PeriodicPotential::from_samples(a, &samples)
            }
        }
    }
}

/// Full configuration of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub potential: PotentialSpec,
    pub a: f64,
    #[serde(rename = "M")]
    pub half_width: usize,
    #[serde(rename = "K")]
    pub k_points: usize,
    #[serde(default)]
    pub k_convention: KConvention,
    pub band: usize,
    /// Output grid for the tabulated Wannier function; defaults to the
    /// 1000-point single-cell diagnostic grid.
    #[serde(default)]
    pub x_grid: Option<XGrid>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SolverError::Config(format!("config: {e}")))
    }

    /// RK4 step count implied by `k_points` under the configured
    /// convention.
    pub fn steps(&self) -> Result<usize> {
        let steps = match self.k_convention {
            KConvention::Paper => {
                if self.k_points < 3 {
                    return Err(SolverError::Config(format!(
                        "K = {} too small for the point-count convention (need K >= 3)",
                        self.k_points
                    )));
                }
                self.k_points - 1
            }
            KConvention::Steps => self.k_points,
        };
        if steps < 2 {
            return Err(SolverError::Config(format!(
                "K = {} gives fewer than 2 steps",
                self.k_points
            )));
        }
        Ok(steps)
    }

    pub fn resolved_x_grid(&self) -> XGrid {
        self.x_grid.unwrap_or(XGrid {
            min: -self.a / 2.0 + self.a / 1000.0,
            max: self.a / 2.0,
            count: 1000,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.a > 0.0) || !self.a.is_finite() {
            return Err(SolverError::Config(format!(
                "lattice constant a = {}",
                self.a
            )));
        }
        if self.half_width < 1 {
            return Err(SolverError::Config("M must be at least 1".into()));
        }
        if self.band < 1 {
            return Err(SolverError::Config("band index is 1-based".into()));
        }
        if let Some(g) = &self.x_grid {
            if g.count < 1 || !(g.max >= g.min) {
                return Err(SolverError::Config(format!(
                    "bad x grid [{}, {}] with {} points",
                    g.min, g.max, g.count
                )));
            }
        }
        Ok(())
    }
}

/// Wall-clock seconds per stage. `construction` covers potential assembly
/// through tabulation of the transform — the part whose cost is compared
/// across resolutions; real-space evaluation is timed separately.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct StageTimings {
    pub potential: f64,
    pub initial: f64,
    pub transport: f64,
    pub phase: f64,
    pub tabulate: f64,
    pub construction: f64,
    pub evaluate: f64,
}

/// Metrics of one completed run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub phi_zak: f64,
    pub phi_realty: f64,
    pub sign: f64,
    pub component_spread: f64,
    pub energy_start: f64,
    pub energy_end: f64,
    pub energy_end_integrated: f64,
    pub energy_end_direct: f64,
    /// `|y(end) - y_direct|` after phase alignment: the transport error.
    pub transport_error: f64,
    /// `max |Im W| / max |W|` on the single-cell diagnostic grid.
    pub imag_error: f64,
    pub center: f64,
    pub variance: f64,
    pub shift_periodicity_residual: f64,
    pub conjugate_symmetry_residual: f64,
    pub berry_connection_residual: f64,
    pub renormalizations: usize,
    pub min_second_singular: f64,
    pub timings: StageTimings,
    pub version: String,
}

impl RunRecord {
    fn check_finite(&self) -> Result<()> {
        let values = [
            self.phi_zak,
            self.phi_realty,
            self.component_spread,
            self.energy_start,
            self.energy_end,
            self.energy_end_integrated,
            self.energy_end_direct,
            self.transport_error,
            self.imag_error,
            self.center,
            self.variance,
            self.shift_periodicity_residual,
            self.conjugate_symmetry_residual,
            self.berry_connection_residual,
        ];
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::Numerical(
                "run produced a non-finite metric".into(),
            ));
        }
        Ok(())
    }
}

/// Everything a run produces, in memory.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub record: RunRecord,
    pub trajectory: Trajectory,
    pub gauged: GaugedTrajectory,
    pub rep: WannierRepresentation,
    pub x_values: Vec<f64>,
    pub wannier_values: Vec<Complex64>,
}

fn metric_grid(a: f64) -> Vec<f64> {
    (1..=1000)
        .map(|j| -a / 2.0 + j as f64 * a / 1000.0)
        .collect()
}

/// Execute the full construction for one configuration.
///
/// Deterministic for a fixed config: the eigensolver, the phase branches,
/// and the peak-sign orientation are all fixed conventions.
pub fn run_pipeline(config: &RunConfig) -> Result<PipelineOutput> {
    config.validate()?;
    let steps = config.steps()?;

    let t = Instant::now();
    let potential = config.potential.build(config.a, config.half_width)?;
    let ws = OperatorWorkspace::with_tolerances(&potential, config.tolerances);
    let potential_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let omega = ws.reciprocal_period();
    let initial = band_eigenpair(&ws, -0.5 * omega, config.band)?;
    let initial_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let trajectory = integrate_band(&ws, config.band, steps, &initial)?;
    let transport_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let phases = extract_phases(&trajectory, config.tolerances.reliable_product)?;
    let mut gauged = apply_gauge(&trajectory, &phases);
    let phase_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let mut rep = assemble_alpha(&gauged)?;
    let tabulate_s = t.elapsed().as_secs_f64();

    // Orient the realty branch: make the Wannier function positive at its
    // largest-magnitude diagnostic sample.
    let metric_xs = metric_grid(config.a);
    let mut w_metric = evaluate_wannier(&rep, &metric_xs);
    let peak = w_metric
        .iter()
        .enumerate()
        .max_by(|(_, p), (_, q)| p.norm().partial_cmp(&q.norm()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    if w_metric[peak].re < 0.0 {
        gauged.negate();
        rep = assemble_alpha(&gauged)?;
        for w in &mut w_metric {
            *w = -*w;
        }
    }

    let max_abs = w_metric.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let max_im = w_metric.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
    let imag_error = if max_abs == 0.0 {
        0.0
    } else {
        max_im / max_abs
    };

    let (transport_error, direct) = endpoint_comparison(&trajectory, &ws)?;

    let t = Instant::now();
    let x_values = config.resolved_x_grid().points();
    let wannier_values = evaluate_wannier(&rep, &x_values);
    let evaluate_s = t.elapsed().as_secs_f64();

    let record = RunRecord {
        config: config.clone(),
        phi_zak: gauged.phases.zak,
        phi_realty: gauged.phases.realty,
        sign: gauged.phases.sign,
        component_spread: gauged.phases.component_spread,
        energy_start: trajectory.states[0].energy,
        energy_end: trajectory.states[steps].energy,
        energy_end_integrated: trajectory.integrated_energy[steps],
        energy_end_direct: direct.energy,
        transport_error,
        imag_error,
        center: compute_center(&gauged.phases, config.a),
        variance: compute_variance(&trajectory)?,
        shift_periodicity_residual: gauged.shift_periodicity_residual(),
        conjugate_symmetry_residual: gauged.conjugate_symmetry_residual(),
        berry_connection_residual: gauged.berry_connection_residual(),
        renormalizations: trajectory.stats.renormalizations,
        min_second_singular: trajectory.stats.min_second_singular,
        timings: StageTimings {
            potential: potential_s,
            initial: initial_s,
            transport: transport_s,
            phase: phase_s,
            tabulate: tabulate_s,
            construction: potential_s + initial_s + transport_s + phase_s + tabulate_s,
            evaluate: evaluate_s,
        },
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    record.check_finite()?;

    // Consistency with the moment quadratures: `moments` on the optimal
    // gauge must agree with the closed forms recorded above; keep it as a
    // cheap internal cross-check in debug builds.
    debug_assert!({
        let m = moments(&gauged);
        (m.center - record.center).abs() < 1e-6 * config.a + 10.0 * transport_error
    });

    Ok(PipelineOutput {
        record,
        trajectory,
        gauged,
        rep,
        x_values,
        wannier_values,
    })
}

fn write_atomic(path: &Path, content: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serialize a finished run: the transform table, the Wannier table, the
/// band energies, and the record itself.
pub fn write_outputs(out: &PipelineOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;

    let mut alpha = String::from("# columns: xi, re, im\n");
    for (xi, z) in out.rep.xi.iter().zip(&out.rep.alpha) {
        alpha.push_str(&format!("{},{},{}\n", fmt(*xi), fmt(z.re), fmt(z.im)));
    }
    write_atomic(&dir.join("alpha.csv"), alpha.as_bytes())?;

    let mut wannier = String::from("# columns: x, re, im, log10abs\n");
    for (x, z) in out.x_values.iter().zip(&out.wannier_values) {
        wannier.push_str(&format!(
            "{},{},{},{}\n",
            fmt(*x),
            fmt(z.re),
            fmt(z.im),
            fmt(z.norm().log10())
        ));
    }
    write_atomic(&dir.join("wannier.csv"), wannier.as_bytes())?;

    let mut bands = String::from("# columns: k, E\n");
    for s in &out.trajectory.states {
        bands.push_str(&format!("{},{}\n", fmt(s.k), fmt(s.energy)));
    }
    write_atomic(&dir.join("bands.csv"), bands.as_bytes())?;

    let json =
        serde_json::to_string_pretty(&out.record).map_err(|e| SolverError::Io(e.to_string()))?;
    write_atomic(&dir.join("run_record.json"), json.as_bytes())?;
    Ok(())
}

/// Which parameter a study sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyAxis {
    K,
    M,
}

/// One band's metrics in one study row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyEntry {
    pub band: usize,
    pub transport_error: Option<f64>,
    pub imag_error: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyRow {
    pub value: usize,
    /// Construction seconds summed over the row's bands.
    pub time: f64,
    pub entries: Vec<StudyEntry>,
}

/// Convergence table in the usual layout: one row per swept value, one
/// error pair per band, plus the fitted order per band (for k-sweeps).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyTable {
    pub axis: StudyAxis,
    pub bands: Vec<usize>,
    pub rows: Vec<StudyRow>,
    /// Per band: least-squares order of `transport_error ~ value^-order`
    /// over the pre-roundoff rows (k-sweeps only).
    pub fitted_order: Vec<(usize, Option<f64>)>,
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|&(x, y)| (x.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in logs {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    (den > 0.0).then(|| num / den)
}

/// Order fit over the pre-roundoff rows: trailing rows are trimmed while
/// the improvement to the last row falls below the square root of the
/// fourth-order expectation (the sequence has flattened onto the floor).
fn fit_order(points: &[(usize, f64)]) -> Option<f64> {
    let mut kept: Vec<(f64, f64)> = points.iter().map(|&(k, e)| (k as f64, e)).collect();
    while kept.len() >= 3 {
        let (k_prev, e_prev) = kept[kept.len() - 2];
        let (k_last, e_last) = kept[kept.len() - 1];
        let expected = (k_last / k_prev).powi(4);
        if e_prev / e_last < expected.sqrt() {
            kept.pop();
        } else {
            break;
        }
    }
    log_log_slope(&kept).map(|s| -s)
}

/// Run one pipeline per `(value, band)` pair and tabulate the errors.
///
/// Per-run failures are recorded in the row and the sweep continues.
pub fn convergence_study(
    base: &RunConfig,
    axis: StudyAxis,
    values: &[usize],
    bands: &[usize],
) -> Result<StudyTable> {
    if values.windows(2).any(|w| w[0] >= w[1]) || values.is_empty() {
        return Err(SolverError::Config(
            "study values must be strictly increasing".into(),
        ));
    }
    if bands.is_empty() {
        return Err(SolverError::Config("study needs at least one band".into()));
    }

    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let mut entries = Vec::with_capacity(bands.len());
        let mut time = 0.0;
        for &band in bands {
            let mut cfg = base.clone();
            cfg.band = band;
            cfg.x_grid = None;
            match axis {
                StudyAxis::K => cfg.k_points = value,
                StudyAxis::M => cfg.half_width = value,
            }
            match run_pipeline(&cfg) {
                Ok(out) => {
                    time += out.record.timings.construction;
                    entries.push(StudyEntry {
                        band,
                        transport_error: Some(out.record.transport_error),
                        imag_error: Some(out.record.imag_error),
                        error: None,
                    });
                }
                Err(e) => entries.push(StudyEntry {
                    band,
                    transport_error: None,
                    imag_error: None,
                    error: Some(e.to_string()),
                }),
            }
        }
        rows.push(StudyRow {
            value,
            time,
            entries,
        });
    }

    let fitted_order = bands
        .iter()
        .map(|&band| {
            if axis != StudyAxis::K {
                return (band, None);
            }
            let points: Vec<(usize, f64)> = rows
                .iter()
                .filter_map(|row| {
                    row.entries
                        .iter()
                        .find(|e| e.band == band)
                        .and_then(|e| e.transport_error)
                        .map(|err| (row.value, err))
                })
                .filter(|(_, e)| *e > 0.0)
                .collect();
            (band, fit_order(&points))
        })
        .collect();

    Ok(StudyTable {
        axis,
        bands: bands.to_vec(),
        rows,
        fitted_order,
    })
}

/// Serialize a study: the table as CSV plus the full structure as JSON.
pub fn write_study(table: &StudyTable, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let axis = match table.axis {
        StudyAxis::K => "K",
        StudyAxis::M => "M",
    };
    let mut csv = format!(
        "# columns: {axis}, time_s{}\n",
        table
            .bands
            .iter()
            .map(|b| format!(", transport_error_band{b}, imag_error_band{b}"))
            .collect::<String>()
    );
    for row in &table.rows {
        csv.push_str(&format!("{},{}", row.value, fmt(row.time)));
        for e in &row.entries {
            match (e.transport_error, e.imag_error) {
                (Some(t), Some(i)) => csv.push_str(&format!(",{},{}", fmt(t), fmt(i))),
                _ => csv.push_str(",nan,nan"),
            }
        }
        csv.push('\n');
    }
    for (band, order) in &table.fitted_order {
        match order {
            Some(o) => csv.push_str(&format!("# fitted order band {band}: {o:.3}\n")),
            None => csv.push_str(&format!("# fitted order band {band}: n/a\n")),
        }
    }
    write_atomic(&dir.join("study.csv"), csv.as_bytes())?;
    let json = serde_json::to_string_pretty(table).map_err(|e| SolverError::Io(e.to_string()))?;
    write_atomic(&dir.join("study.json"), json.as_bytes())?;
    Ok(())
}

/// Direct band energies on a uniform k-grid (no transport), for the bands
/// table output.
pub fn band_energies(
    potential: &PotentialSpec,
    a: f64,
    half_width: usize,
    band: usize,
    nk: usize,
    tolerances: Tolerances,
) -> Result<Vec<(f64, f64)>> {
    if nk < 2 {
        return Err(SolverError::Config(
            "band grid needs at least 2 points".into(),
        ));
    }
    let potential = potential.build(a, half_width)?;
    let ws = OperatorWorkspace::with_tolerances(&potential, tolerances);
    let omega = ws.reciprocal_period();
    (0..nk)
        .map(|j| {
            let k = omega * (j as f64 / (nk - 1) as f64 - 0.5);
            band_eigenpair(&ws, k, band).map(|s| (k, s.energy))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn cosine_config() -> RunConfig {
        RunConfig {
            potential: PotentialSpec::Coefficients {
                cos: vec![0.0, -0.5],
                sin: vec![],
            },
            a: TWO_PI,
            half_width: 4,
            k_points: 201,
            k_convention: KConvention::Paper,
            band: 1,
            x_grid: None,
            tolerances: Tolerances::default(),
        }
    }

    #[test]
    fn point_count_convention_maps_to_one_fewer_step() {
        let mut cfg = cosine_config();
        cfg.k_points = 33;
        assert_eq!(cfg.steps().unwrap(), 32);
        cfg.k_convention = KConvention::Steps;
        assert_eq!(cfg.steps().unwrap(), 33);
        cfg.k_points = 1;
        assert!(cfg.steps().is_err());
    }

    #[test]
    fn constant_potential_is_rejected_as_degenerate() {
        // Every band of a strictly constant potential crosses a partner at
        // the zone edge, so the initial eigensolve must refuse.
        let mut cfg = cosine_config();
        cfg.potential = PotentialSpec::Coefficients {
            cos: vec![0.5],
            sin: vec![],
        };
        let err = run_pipeline(&cfg).unwrap_err();
        assert!(matches!(err, SolverError::DegenerateBand { .. }), "{err}");
    }

    #[test]
    fn cosine_well_runs_end_to_end() {
        // Even potential with the well at x = 0: quantized Zak phase at 0,
        // real positive Wannier peak, center at the origin.
        let out = run_pipeline(&cosine_config()).unwrap();
        let r = &out.record;
        assert!(r.phi_zak.abs() < 1e-8, "zak {}", r.phi_zak);
        assert!(
            r.transport_error < 1e-9,
            "transport error {}",
            r.transport_error
        );
        // The imaginary residual floors at the truncation edge for small M
        // (lone unpaired boundary sample ~ |alpha(edge)| / K).
        assert!(r.imag_error < 1e-7, "imag error {}", r.imag_error);
        assert_relative_eq!(r.energy_start, r.energy_end, max_relative = 1e-10);
        assert!(r.center.abs() < 1e-8, "center {}", r.center);
        assert!(r.variance > 0.0);
        // Positive at its peak by the orientation convention.
        let peak = out
            .wannier_values
            .iter()
            .max_by(|p, q| p.norm().partial_cmp(&q.norm()).unwrap())
            .unwrap();
        assert!(peak.re > 0.0);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = cosine_config();
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"M\":4"), "{text}");
        assert!(text.contains("\"K\":201"), "{text}");
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn study_records_errors_and_continues() {
        let mut cfg = cosine_config();
        cfg.k_points = 8;
        // Band 5 exceeds what a free-like band structure can isolate at the
        // zone edge for M = 1; expect per-entry errors, not a panic.
        cfg.half_width = 1;
        let table = convergence_study(&cfg, StudyAxis::K, &[8, 16], &[1, 3]).unwrap();
        assert_eq!(table.rows.len(), 2);
        for row in &table.rows {
            assert_eq!(row.entries.len(), 2);
        }
        assert!(convergence_study(&cfg, StudyAxis::K, &[16, 8], &[1]).is_err());
    }

    #[test]
    fn slope_fit_recovers_power_law() {
        let points: Vec<(f64, f64)> = (1..=6)
            .map(|i| {
                let x = (10 * i) as f64;
                (x, 3.0 * x.powf(-4.0))
            })
            .collect();
        let slope = log_log_slope(&points).unwrap();
        assert_relative_eq!(slope, -4.0, epsilon = 1e-12);
    }

    #[test]
    fn outputs_are_deterministic_and_well_formed() {
        let dir = std::env::temp_dir().join(format!("wannier1d-test-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let out = run_pipeline(&cosine_config()).unwrap();
        write_outputs(&out, &dir.join("run1")).unwrap();
        let out2 = run_pipeline(&cosine_config()).unwrap();
        write_outputs(&out2, &dir.join("run2")).unwrap();
        for name in ["alpha.csv", "wannier.csv", "bands.csv"] {
            let a = fs::read(dir.join("run1").join(name)).unwrap();
            let b = fs::read(dir.join("run2").join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
        let record: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("run1/run_record.json")).unwrap())
                .unwrap();
        assert!(record["transport_error"].as_f64().unwrap().is_finite());
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn samples_file_round_trip() {
        let dir = std::env::temp_dir().join(format!("wannier1d-samples-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("pot.txt");
        let grid = crate::potential::sample_grid(TWO_PI, 2).unwrap();
        let content: String = grid
            .iter()
            .map(|&t| format!("{:.17}\n", 0.3 + 0.1 * t.cos()))
            .collect();
        fs::write(&path, content).unwrap();
        let spec = PotentialSpec::Samples { path: path.clone() };
        let pot = spec.build(TWO_PI, 2).unwrap();
        assert_relative_eq!(pot.coefficient(0).re, 0.3, epsilon = 1e-12);

        // Wrong M: line count mismatch must be rejected.
        assert!(spec.build(TWO_PI, 3).is_err());
        let _ = fs::remove_dir_all(&dir);
    }
}
