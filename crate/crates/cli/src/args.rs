use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dunkl_liyau::semigroup::Convention;

#[derive(Debug, Clone, Parser)]
#[command(name = "dunkl-liyau", version, about = "Verify Li–Yau type inequalities for the Z_2^d Dunkl heat kernel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Print p_t(x, y), ln p and its derivatives on a grid.
    KernelEval(KernelEvalArgs),
    /// Sweep the Li–Yau functional of the kernel over (t, x, y).
    LiyauScan(CommonArgs),
    /// Li–Yau and gradient-form checks for P_t f with product data.
    SolutionScan(SolutionArgs),
    /// Parabolic Harnack checks for a kernel or semigroup solution.
    HarnackScan(HarnackArgs),
    /// Normalization, symmetry, Chapman–Kolmogorov, heat equation and upper bound.
    SemigroupCheck(SemigroupArgs),
    /// Auxiliary claims: f >= 0, h monotone, Pi_log <= 0, chain rule, log-convexity.
    ClaimsVerify(CommonArgs),
    /// Aggregate JSON-lines reports into per-claim pass/fail counts.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    JsonLines,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json-lines")]
    pub format: Format,
    /// Write rows here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit the timestamp from the header line.
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Multiplicities, one per coordinate; the dimension is their count.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.5,1.5")]
    pub kappa: Vec<f64>,
    /// Time grid. Defaults to nine log-spaced points in [1e-2, 1e2].
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
    /// Per-coordinate grid values.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-10,-3,-1,-0.3,0,0.3,1,3,10"
    )]
    pub coords: Vec<f64>,
    /// Absolute tolerance on inequality deficits.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Relative tolerance of the adaptive quadratures.
    #[arg(long, default_value_t = 1e-10)]
    pub quad_tol: f64,
    /// Node cap of the adaptive quadratures.
    #[arg(long, default_value_t = 4096)]
    pub max_nodes: usize,
    /// Seed for randomized grid augmentation.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Number of random points added to the grid.
    #[arg(long, default_value_t = 0)]
    pub random: usize,
    #[arg(long, value_enum, default_value = "standard", hide = true)]
    pub convention: ConventionArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Standard,
    HalfExponent,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Standard => Convention::Standard,
            ConventionArg::HalfExponent => Convention::HalfExponent,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct KernelEvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// A single evaluation point x; sweeps the coordinate grid if omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    /// A single source point y; sweeps the coordinate grid if omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct SolutionArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Initial profile per coordinate: `indicator:LO:HI`, `bump:CENTER:RADIUS`
    /// or `two-bump:LEFT:RIGHT:RADIUS`. Repeat once per coordinate, or give
    /// one profile for all of them.
    #[arg(long = "datum", allow_hyphen_values = true, default_value = "two-bump:-1:1.5:0.6")]
    pub datum: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolutionKind {
    Kernel,
    Datum,
}

#[derive(Debug, Clone, Args)]
pub struct HarnackArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value = "kernel")]
    pub solution: SolutionKind,
    /// Source point of the kernel solution; the origin if omitted.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub source: Option<Vec<f64>>,
    #[arg(long = "datum", allow_hyphen_values = true, default_value = "two-bump:-1:1.5:0.6")]
    pub datum: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SemigroupArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// First time step of the Chapman–Kolmogorov checks.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// JSON-lines files produced by the other commands.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}
