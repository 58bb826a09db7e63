//! Argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "mmq",
    version,
    about = "Asymptotic density of a Markov-modulated fluid queue in heavy traffic",
    after_help = "Any flag may also come from a flat key = value file given with --config; flags win."
)]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate F(x, eta) at one point.
    #[command(allow_negative_numbers = true)]
    Eval(EvalArgs),
    /// Evaluate F on a rectangular lattice.
    #[command(allow_negative_numbers = true)]
    Grid(GridArgs),
    /// Trace rays of either region.
    #[command(allow_negative_numbers = true)]
    Rays(RaysArgs),
    /// Export both caustic branches and the cusp.
    #[command(allow_negative_numbers = true)]
    Caustics(CausticsArgs),
    /// Tabulate the x-marginal M(x).
    #[command(allow_negative_numbers = true)]
    Marginal(MarginalArgs),
    /// Run a verification suite; exit status 1 if any check fails.
    #[command(allow_negative_numbers = true)]
    Check(CheckArgs),
    /// Solve the full problem by finite volumes and compare.
    #[command(allow_negative_numbers = true)]
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Thresholds {
    #[arg(long)]
    pub corner_mu: Option<f64>,
    #[arg(long)]
    pub corner_gamma: Option<f64>,
    #[arg(long)]
    pub eta_band: Option<f64>,
    #[arg(long)]
    pub transition_omega: Option<f64>,
    #[arg(long)]
    pub inner_v: Option<f64>,
    #[arg(long)]
    pub inner_mu: Option<f64>,
    #[arg(long)]
    pub cusp_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Contour {
    /// Quadrature nodes on the inverse-Laplace contour.
    #[arg(long)]
    pub bromwich_nodes: Option<usize>,
    /// Half length of the contour segment.
    #[arg(long)]
    pub bromwich_half_length: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub x: f64,
    #[arg(long)]
    pub eta: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long = "D", default_value_t = 1.0)]
    pub d: f64,
    /// `auto`, or one of region1, region2, small_x, inner, inner_inner,
    /// corner, transition.
    #[arg(long, default_value = "auto")]
    pub layer: String,
    /// Also report the value itself when it fits in f64.
    #[arg(long)]
    pub raw: bool,
    #[command(flatten)]
    pub thresholds: Thresholds,
    #[command(flatten)]
    pub contour: Contour,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long = "D", default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, default_value_t = 0.0)]
    pub x_min: f64,
    #[arg(long, default_value_t = 2.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 41)]
    pub nx: usize,
    #[arg(long, default_value_t = -1.0)]
    pub eta_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub eta_max: f64,
    #[arg(long, default_value_t = 41)]
    pub neta: usize,
    #[arg(long)]
    pub raw: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub thresholds: Thresholds,
    #[command(flatten)]
    pub contour: Contour,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RayFamily {
    /// Rays leaving the wall below eta = 1, labelled by s.
    #[value(name = "1")]
    One,
    /// Rays leaving the wall above eta = 1, labelled by sigma.
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Args)]
pub struct RaysArgs {
    #[arg(long = "D", default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, value_enum, default_value_t = RayFamily::One)]
    pub region: RayFamily,
    /// Ray labels (s for region 1, sigma for region 2), comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [-1.0, -0.5, 0.0, 0.25, 0.5])]
    pub starts: Vec<f64>,
    /// Largest ray time (t or tau).
    #[arg(long, default_value_t = 3.0)]
    pub t_max: f64,
    /// Samples per ray.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CausticsArgs {
    #[arg(long = "D", default_value_t = 1.0)]
    pub d: f64,
    /// Samples per branch.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// The upper branch is cut where it reaches this x.
    #[arg(long, default_value_t = 3.0)]
    pub x_cap: f64,
    /// Directory for caustic_plus.csv, caustic_minus.csv and cusp.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct MarginalArgs {
    #[arg(long, default_value_t = 1e-2)]
    pub eps: f64,
    #[arg(long = "D", default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, default_value_t = 3.0)]
    pub x_max: f64,
    /// Number of intervals; n + 1 rows are written.
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long)]
    pub raw: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    Eikonal,
    Transport,
    Roundtrip,
    Matching,
    CausticBranches,
    Lambda,
    EtaMarginal,
    Oracle,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub suite: SuiteName,
    /// Restrict to one D (default: 0.5, 1 and 2; D = 1 for eta-marginal
    /// and oracle).
    #[arg(long = "D")]
    pub d: Option<f64>,
    /// Coarse eps for eta-marginal (default 1e-3) and oracle (default 0.1).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Finer eps for the improvement check (default eps / 10 for
    /// eta-marginal, eps / 2 for oracle).
    #[arg(long)]
    pub eps_fine: Option<f64>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Random samples per region.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
    /// Also write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub contour: Contour,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long = "D", default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, default_value_t = 300)]
    pub nx: usize,
    #[arg(long, default_value_t = 400)]
    pub neta: usize,
    #[arg(long, default_value_t = 3.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = -2.0)]
    pub eta_min: f64,
    #[arg(long, default_value_t = 3.0)]
    pub eta_max: f64,
    /// sg, upwind or centered.
    #[arg(long, default_value = "sg")]
    pub scheme: String,
    /// Re-solve on a 25% larger box and report the change of M(x).
    #[arg(long)]
    pub truncation: bool,
    /// Write the grid as x,eta,F here.
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
    /// Write the x-marginal as x,M_grid,M_asymptotic here.
    #[arg(long)]
    pub marginal_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
