use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use kuiper::mesh::MeshFormat;
use kuiper::verify::Fault;

/// Corrugated cone surfaces, ε-isometry reports and verification sweeps.
///
/// Every flag can also be set through an environment variable named
/// `KUIPER_<FLAG>` (for example `KUIPER_ETA=0.1`) or through a TOML file
/// given with `--config`. Flags win over the environment, which wins over the
/// file.
#[derive(Debug, Parser)]
#[command(name = "kuiper", version)]
pub struct Cli {
    /// TOML file with `key = value` settings (`N`, `eta`, `eps`, `grid`, ...).
    #[arg(long, global = true, env = "KUIPER_CONFIG", value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads for grid evaluation (default: all cores).
    #[arg(long, global = true, env = "KUIPER_THREADS", value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build one corrugated cone, write its mesh and defect report.
    Cone(ConeArgs),
    /// Build one cone per N, with a CSV summary of the defects.
    Sweep(SweepArgs),
    /// Run the seeded property checks and print a JSON summary.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SurfaceArgs {
    #[arg(long, env = "KUIPER_ETA")]
    pub eta: Option<f64>,

    #[arg(long, env = "KUIPER_EPS")]
    pub eps: Option<f64>,

    /// Grid size `<nx>x<ny>`; `nx` defaults to 40 N and `ny` to 100.
    #[arg(long, env = "KUIPER_GRID", value_name = "NXxNY")]
    pub grid: Option<String>,

    /// Half-height of the cylinder, `y ∈ [-y_max, y_max]`.
    #[arg(long = "y-max", env = "KUIPER_Y_MAX")]
    pub y_max: Option<f64>,

    #[arg(long, env = "KUIPER_FORMAT", value_parser = parse_format)]
    pub format: Option<MeshFormat>,
}

#[derive(Debug, Args)]
pub struct ConeArgs {
    /// Corrugation number.
    #[arg(long = "N", env = "KUIPER_N", value_parser = clap::value_parser!(u32).range(1..))]
    pub n: Option<u32>,

    #[command(flatten)]
    pub surface: SurfaceArgs,

    /// Mesh file (default `cone.obj` or `cone.ply`).
    #[arg(long, env = "KUIPER_OUT", value_name = "PATH")]
    pub out: Option<PathBuf>,

    /// Defect report JSON; printed to stdout when absent.
    #[arg(long, env = "KUIPER_REPORT", value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Comma separated corrugation numbers (default 6,12,24,48).
    #[arg(long = "N", env = "KUIPER_SWEEP_N", value_delimiter = ',', num_args = 0..)]
    pub ns: Option<Vec<u32>>,

    #[command(flatten)]
    pub surface: SurfaceArgs,

    /// Output directory for meshes, reports and `sweep.csv`.
    #[arg(long, env = "KUIPER_OUT", value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, env = "KUIPER_SEED")]
    pub seed: Option<u64>,

    /// Random instances for the loop checks.
    #[arg(long, env = "KUIPER_INSTANCES")]
    pub instances: Option<usize>,

    /// Summary JSON; printed to stdout when absent.
    #[arg(long, env = "KUIPER_REPORT", value_name = "PATH")]
    pub report: Option<PathBuf>,

    #[arg(long = "inject-fault", hide = true, value_parser = parse_fault)]
    pub inject_fault: Option<Fault>,
}

fn parse_format(s: &str) -> Result<MeshFormat, String> {
    s.parse().map_err(|e: kuiper::Error| e.to_string())
}

fn parse_fault(s: &str) -> Result<Fault, String> {
    match s {
        "rmin-sign" => Ok(Fault::RminSign),
        _ => Err(format!("unknown fault {s:?} (known: rmin-sign)")),
    }
}

/// `"480x100"` → `(480, 100)`.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| format!("--grid: expected <nx>x<ny>, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("--grid: {v:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}
