//! CLI driver: single runs, convergence studies, and band tables.
//!
//! Exit code 0 on success; on failure a machine-readable JSON error object
//! is printed to stderr and the exit code is nonzero.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use wannier1d::{
    band_energies, convergence_study, run_pipeline, write_outputs, write_study, KConvention,
    PotentialSpec, RunConfig, SolverError, StudyAxis, Tolerances, XGrid,
};

#[derive(Parser)]
#[command(
    name = "wannier1d",
    version,
    about = "Optimally localized Wannier functions for 1-D periodic potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full construction for one configuration and write the
    /// transform, Wannier, and band tables plus a JSON run record.
    Run(RunArgs),
    /// Sweep the momentum resolution K (or the truncation M) and tabulate
    /// the transport and imaginary-part errors per band.
    Study(StudyArgs),
    /// Tabulate band energies E(k) from direct eigensolves only.
    Bands(BandsArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Builtin name (gaussian5 | asym-exp), a .json potential spec, or a
    /// samples file with 2M+1 values on the uniform cell grid.
    #[arg(long)]
    potential: Option<String>,
    /// Lattice constant.
    #[arg(long)]
    a: Option<f64>,
    /// Fourier truncation half-width.
    #[arg(long = "M")]
    m: Option<usize>,
    /// JSON run configuration; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the relative band-gap tolerance.
    #[arg(long = "tol-gap")]
    tol_gap: Option<f64>,
    /// Override the pseudoinverse conditioning tolerance.
    #[arg(long = "tol-cond")]
    tol_cond: Option<f64>,
    /// Override the norm-drift tolerance.
    #[arg(long = "tol-drift")]
    tol_drift: Option<f64>,
    /// Output directory.
    #[arg(long, default_value = "wannier1d-out")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Momentum resolution (grid points including both zone edges).
    #[arg(long = "K")]
    k: Option<usize>,
    /// How K maps to RK4 steps.
    #[arg(long, value_enum, default_value = "paper")]
    k_convention: KConventionArg,
    /// Band index (1-based).
    #[arg(long)]
    band: Option<usize>,
    #[arg(long)]
    xmin: Option<f64>,
    #[arg(long)]
    xmax: Option<f64>,
    /// Number of output grid points for the Wannier table.
    #[arg(long)]
    nx: Option<usize>,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Strictly increasing K values to sweep.
    #[arg(long = "K-list", value_delimiter = ',')]
    k_list: Vec<usize>,
    /// Strictly increasing M values to sweep instead (requires --K).
    #[arg(long = "m-list", value_delimiter = ',')]
    m_list: Vec<usize>,
    /// Fixed K for an M sweep.
    #[arg(long = "K")]
    k: Option<usize>,
    /// Bands to include.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    bands: Vec<usize>,
    #[arg(long, value_enum, default_value = "paper")]
    k_convention: KConventionArg,
}

#[derive(Args)]
struct BandsArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Bands to tabulate.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    bands: Vec<usize>,
    /// Number of k grid points across the Brillouin zone.
    #[arg(long, default_value_t = 201)]
    nk: usize,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum KConventionArg {
    Paper,
    Steps,
}

impl From<KConventionArg> for KConvention {
    fn from(v: KConventionArg) -> Self {
        match v {
            KConventionArg::Paper => KConvention::Paper,
            KConventionArg::Steps => KConvention::Steps,
        }
    }
}

fn tolerances(common: &CommonArgs, base: Tolerances) -> Tolerances {
    let mut tol = base;
    if let Some(g) = common.tol_gap {
        tol.gap = g;
    }
    if let Some(c) = common.tol_cond {
        tol.cond = c;
    }
    if let Some(d) = common.tol_drift {
        tol.drift = d;
    }
    tol
}

/// Assemble a RunConfig from an optional config file plus flag overrides.
fn build_config(
    common: &CommonArgs,
    k: Option<usize>,
    band: Option<usize>,
) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            RunConfig::from_json(&text)?
        }
        None => {
            let potential = common
                .potential
                .as_deref()
                .ok_or_else(|| anyhow::anyhow!("--potential (or --config) is required"))?;
            RunConfig {
                potential: PotentialSpec::parse(potential)?,
                a: common.a.ok_or_else(|| anyhow::anyhow!("--a is required"))?,
                half_width: common.m.ok_or_else(|| anyhow::anyhow!("--M is required"))?,
                k_points: k.unwrap_or(0),
                k_convention: KConvention::Paper,
                band: band.unwrap_or(1),
                x_grid: None,
                tolerances: Tolerances::default(),
            }
        }
    };
    if let Some(p) = &common.potential {
        if common.config.is_some() {
            cfg.potential = PotentialSpec::parse(p)?;
        }
    }
    if let Some(a) = common.a {
        cfg.a = a;
    }
    if let Some(m) = common.m {
        cfg.half_width = m;
    }
    if let Some(k) = k {
        cfg.k_points = k;
    }
    if let Some(b) = band {
        cfg.band = b;
    }
    cfg.tolerances = tolerances(common, cfg.tolerances);
    Ok(cfg)
}

fn cmd_run(args: &RunArgs) -> anyhow::Result<()> {
    let mut cfg = build_config(&args.common, args.k, args.band)?;
    cfg.k_convention = args.k_convention.into();
    if cfg.k_points == 0 {
        bail!("--K is required");
    }
    match (args.xmin, args.xmax, args.nx) {
        (None, None, None) => {}
        (xmin, xmax, nx) => {
            let base = cfg.resolved_x_grid();
            cfg.x_grid = Some(XGrid {
                min: xmin.unwrap_or(base.min),
                max: xmax.unwrap_or(base.max),
                count: nx.unwrap_or(base.count),
            });
        }
    }

    let out = run_pipeline(&cfg)?;
    write_outputs(&out, &args.common.out)?;
    let r = &out.record;
    println!(
        "band {} K={}: phi_zak={:+.9}, phi_0={:+.9}, transport_error={:.3e}, imag_error={:.3e}, \
         center={:+.6e}, variance={:.6e}, construction={:.3}s",
        cfg.band,
        cfg.k_points,
        r.phi_zak,
        r.phi_realty,
        r.transport_error,
        r.imag_error,
        r.center,
        r.variance,
        r.timings.construction
    );
    println!("outputs written to {}", args.common.out.display());
    Ok(())
}

fn cmd_study(args: &StudyArgs) -> anyhow::Result<()> {
    let mut base = build_config(&args.common, args.k, args.bands.first().copied())?;
    base.k_convention = args.k_convention.into();
    let (axis, values) = if !args.m_list.is_empty() {
        if !args.k_list.is_empty() {
            bail!("--K-list and --m-list are mutually exclusive");
        }
        if base.k_points == 0 {
            bail!("--K is required for an M sweep");
        }
        (StudyAxis::M, args.m_list.clone())
    } else {
        if args.k_list.is_empty() {
            bail!("provide --K-list (or --m-list with --K)");
        }
        (StudyAxis::K, args.k_list.clone())
    };

    let table = convergence_study(&base, axis, &values, &args.bands)?;
    write_study(&table, &args.common.out)?;
    for row in &table.rows {
        let cells: Vec<String> = row
            .entries
            .iter()
            .map(|e| match (e.transport_error, e.imag_error) {
                (Some(t), Some(i)) => format!("band {}: {t:.3e} / {i:.3e}", e.band),
                _ => format!(
                    "band {}: {}",
                    e.band,
                    e.error.as_deref().unwrap_or("failed")
                ),
            })
            .collect();
        println!(
            "{}={:<6} t={:.3}s  {}",
            match axis {
                StudyAxis::K => "K",
                StudyAxis::M => "M",
            },
            row.value,
            row.time,
            cells.join("  ")
        );
    }
    for (band, order) in &table.fitted_order {
        match order {
            Some(o) => println!("fitted convergence order, band {band}: {o:.3}"),
            None => println!("fitted convergence order, band {band}: n/a"),
        }
    }
    println!("study written to {}", args.common.out.display());
    Ok(())
}

fn cmd_bands(args: &BandsArgs) -> anyhow::Result<()> {
    let cfg = build_config(&args.common, None, args.bands.first().copied())?;
    std::fs::create_dir_all(&args.common.out)?;
    for &band in &args.bands {
        let rows = band_energies(
            &cfg.potential,
            cfg.a,
            cfg.half_width,
            band,
            args.nk,
            cfg.tolerances,
        )?;
        let mut csv = String::from("# columns: k, E\n");
        for (k, e) in rows {
            csv.push_str(&format!("{k:.16e},{e:.16e}\n"));
        }
        let path = args.common.out.join(format!("bands_band{band}.csv"));
        std::fs::write(&path, csv)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Study(args) => cmd_study(args),
        Command::Bands(args) => cmd_bands(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let kind = err
                .downcast_ref::<SolverError>()
                .map(SolverError::kind)
                .unwrap_or("cli");
            let payload = serde_json::json!({
                "error": { "kind": kind, "message": err.to_string() }
            });
            eprintln!("{payload}");
            ExitCode::FAILURE
        }
    }
}
