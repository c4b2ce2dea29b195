use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "setconv", version, about = "Set-convergence demos and reports")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Truncation radius.
    #[arg(long, global = true)]
    pub rho: Option<f64>,
    /// Norm on the underlying space.
    #[arg(long, global = true, value_enum)]
    pub norm: Option<NormArg>,
    /// One `lo:hi:steps` per dimension.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Vec<String>,
    /// Parameter schedule of the demo, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub schedule: Option<Vec<f64>>,
    /// Demo tolerance.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Output directory; reports go to stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON config; its fields override the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Also write an SVG chart (requires --out).
    #[arg(long, global = true)]
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Euclidean,
    Max,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distances, excesses and truncated Hausdorff distances of two clouds.
    Dist(DistArgs),
    /// Inner and outer limit estimates of a named set sequence.
    Limits(LimitsArgs),
    /// Epigraph distance of two functions.
    EpiDist(EpiDistArgs),
    /// Bounds on minima and near-minimizers from the epigraph distance.
    EpiBounds(EpiBoundsArgs),
    /// Quadratic penalty for x = 0.
    Penalty,
    /// Cubic constraint: naive tightening against the soft penalty.
    Cubic,
    /// Cubic constraint softened with an auxiliary variable.
    Soften(SoftenArgs),
    /// Location-mixture density estimation over nested centers.
    KwDensity(KwArgs),
    /// Complementarity problem by smoothing and Newton's method.
    Cp(CpArgs),
    /// Homotopy continuation for a generalized equation.
    Homotopy(HomotopyArgs),
    /// Exact polyhedral cones against sampled estimates.
    Cones(ConesArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dist(_) => "dist",
            Command::Limits(_) => "limits",
            Command::EpiDist(_) => "epi-dist",
            Command::EpiBounds(_) => "epi-bounds",
            Command::Penalty => "penalty",
            Command::Cubic => "cubic",
            Command::Soften(_) => "soften",
            Command::KwDensity(_) => "kw-density",
            Command::Cp(_) => "cp",
            Command::Homotopy(_) => "homotopy",
            Command::Cones(_) => "cones",
        }
    }
}

#[derive(Debug, Args)]
pub struct DistArgs {
    /// Point cloud JSON files `{"dim": n, "points": [[...], ...]}`.
    #[arg(num_args = 0..=2)]
    pub files: Vec<PathBuf>,
    /// Built-in pair instead of files: `sharpness-pair`.
    #[arg(long, conflicts_with = "files")]
    pub builtin: Option<String>,
    /// Truncation center, comma separated (default: origin).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub center: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    /// odd-even, shrinking or intersection.
    #[arg(long, default_value = "odd-even")]
    pub sequence: String,
}

/// A function: a JSON file path, inline JSON, or a built-in `name` / `name:param`.
#[derive(Debug, Args)]
pub struct FunctionPair {
    #[arg(long, default_value = "penalty:100", allow_hyphen_values = true)]
    pub f: String,
    #[arg(long, default_value = "penalty-limit", allow_hyphen_values = true)]
    pub g: String,
}

#[derive(Debug, Args)]
pub struct EpiDistArgs {
    #[command(flatten)]
    pub pair: FunctionPair,
}

#[derive(Debug, Args)]
pub struct EpiBoundsArgs {
    #[command(flatten)]
    pub pair: FunctionPair,
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Defaults to `epsilon + 2 dl + 3h`.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SoftenArgs {
    /// `theta = nu^theta_power`.
    #[arg(long, default_value_t = 0.5)]
    pub theta_power: f64,
    /// `alpha = nu^(-alpha_power)`.
    #[arg(long, default_value_t = 1.0)]
    pub alpha_power: f64,
}

#[derive(Debug, Args)]
pub struct KwArgs {
    /// Sample file: a JSON array of reals or a point cloud JSON.
    #[arg(long)]
    pub sample: Option<PathBuf>,
    /// Size of the synthetic sample drawn when no file is given.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct CpArgs {
    /// lcp or lcp-1d.
    #[arg(long, default_value = "lcp")]
    pub mapping: String,
    /// Starting point, comma separated (default: origin).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z0: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct HomotopyArgs {
    #[arg(long, default_value = "sin-homotopy")]
    pub mapping: String,
    /// Right-hand side, comma separated (default: origin).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub target: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct ConesArgs {
    /// JSON file with a list of `{"name", "polyhedron": {"A", "b"}, "point"}`
    /// instances (default: five built-in planar instances).
    #[arg(long)]
    pub instances: Option<PathBuf>,
}
