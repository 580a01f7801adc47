//! `ballspec` command-line front end.

mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ballspec::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::RunConfig;

/// Spectral tools for vector fields in a ball: zero tables, eigenbases,
/// decompositions, Sobolev diagnostics, boundary value problems and
/// verification suites.
#[derive(Debug, Parser)]
#[command(name = "ballspec", version)]
pub struct Cli {
    /// JSON file whose keys override the corresponding flags
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Zeros of ψₙ or ψₙ′ as CSV
    Zeros(ZerosArgs),
    /// Eigenvalue table of one operator family as JSON
    Eigentable(EigentableArgs),
    /// Quadrature nodes and weights as CSV
    SampleGrid(SampleGridArgs),
    /// A built-in analytic field sampled on a grid, as JSON
    SampleField(SampleFieldArgs),
    /// Expansion coefficients of a sampled field
    Decompose(DecomposeArgs),
    /// Sobolev-type membership diagnostics
    Sobolev(SobolevArgs),
    /// Solve ∇div v + λv = f with n·v = 0 on the sphere
    Solve(SolveArgs),
    /// Run verification suites and print a JSON report
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Psi,
    PsiPrime,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    GradDiv,
    Curl,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeFamilyArg {
    GradDiv,
    CurlPlus,
    CurlMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    /// gradient of a Gaussian plus a divergence-free Gaussian swirl
    Helmholtz,
    /// the gradient part of `helmholtz`
    Potential,
    /// the divergence-free part of `helmholtz`
    Solenoidal,
    /// 2r ê_r
    Radial,
    /// gradient of a compactly supported bump
    Compact,
    /// a single eigenfield selected with --family/--n/--m/--k
    Mode,
}

#[derive(Clone, Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long, default_value_t = ballspec::fieldgrid::DEFAULT_NR)]
    pub nr: usize,
    #[arg(long, default_value_t = ballspec::fieldgrid::DEFAULT_NTHETA)]
    pub ntheta: usize,
    #[arg(long, default_value_t = ballspec::fieldgrid::DEFAULT_NPHI)]
    pub nphi: usize,
}

#[derive(Clone, Debug, Args)]
pub struct ZerosArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    /// Order n ≥ 0
    #[arg(long, allow_negative_numbers = true)]
    pub n: i64,
    /// Number of zeros
    #[arg(long, conflicts_with = "cutoff", required_unless_present = "cutoff")]
    pub count: Option<usize>,
    /// Every zero below this value
    #[arg(long)]
    pub cutoff: Option<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct EigentableArgs {
    #[arg(long, value_enum, default_value = "grad-div")]
    pub family: FamilyArg,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Keep zeros below this value
    #[arg(long, default_value_t = 12.0)]
    pub cutoff: f64,
    /// Keep degrees n ≤ nmax
    #[arg(long)]
    pub nmax: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct SampleGridArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct ModeArgs {
    #[arg(long, value_enum, default_value = "grad-div")]
    pub family: ModeFamilyArg,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub k: i64,
}

#[derive(Clone, Debug, Args)]
pub struct SampleFieldArgs {
    #[arg(long, value_enum)]
    pub field: FieldArg,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct DecomposeArgs {
    /// Field JSON as written by `sample-field`
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 12.0)]
    pub cutoff: f64,
    /// Coefficient JSON destination (stdout if absent)
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Parseval report destination
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct SobolevArgs {
    /// Sampled field JSON; traces then come from an interpolant
    #[arg(long, conflicts_with = "field", required_unless_present = "field")]
    pub input: Option<PathBuf>,
    /// Built-in analytic field
    #[arg(long, value_enum)]
    pub field: Option<FieldArg>,
    #[command(flatten)]
    pub mode: ModeArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 1)]
    pub s: u32,
    #[arg(long, default_value_t = 30.0)]
    pub cutoff: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub trace_tol: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct SolveArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Coefficient JSON, or field JSON analyzed at --cutoff
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 12.0)]
    pub cutoff: f64,
    /// Resonance tolerance; defaults to 1e-9·max(1, |λ|)
    #[arg(long)]
    pub tol_res: Option<f64>,
    #[arg(long, default_value_t = ballspec::bvp::DEFAULT_SOLVABILITY_TOL)]
    pub solvability_tol: f64,
    /// Also report the finite-difference residual on interior probes
    #[arg(long)]
    pub fd: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Highest mode degree in the per-mode suites
    #[arg(long, default_value_t = 3)]
    pub nmax: usize,
    #[arg(long, default_value_t = 12.0)]
    pub cutoff: f64,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Convergence(String),
    #[error("{0}")]
    Format(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Format(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Format(_) => 4,
            CliError::Failed(_) => 5,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Domain(_) | Error::Invalid(_) | Error::NotInTable(_) | Error::GridMismatch => CliError::Usage(msg),
            Error::Convergence { .. } | Error::Resolution(_) => CliError::Convergence(msg),
            Error::Format(_) => CliError::Format(msg),
            Error::Unsolvable(_) => CliError::Failed(msg),
        }
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("BALLSPEC_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("BALLSPEC_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    commands::dispatch(cli.command, &cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
