use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isp_core::{IspError, ProblemGeometry};

#[derive(Debug, Parser)]
#[command(
    name = "isp",
    version,
    about = "Singular values, bandwidth and TSVD inversion for the 2D Helmholtz inverse source problem"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Singular values for m = 0..=mmax as CSV or JSON.
    Spectrum(SpectrumArgs),
    /// Bandwidth, its bounds and the angular sampling step.
    Bandwidth(BandwidthArgs),
    /// Bandwidth sweep over equally spaced size parameters; writes sweep.csv and fits.csv.
    Sweep(SweepArgs),
    /// Boundary data of a built-in source, optionally with noise.
    Synthesize(SynthesizeArgs),
    /// TSVD reconstruction from boundary data or from a built-in source.
    Reconstruct(ReconstructArgs),
}

/// Either `--kappa0/--kappa` (measurement radius 1) or `--k/--r0/--r`.
#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    /// Measurement size parameter k R.
    #[arg(long, requires = "kappa0", conflicts_with_all = ["k", "r0", "r"])]
    pub kappa: Option<f64>,
    /// Source size parameter k R0.
    #[arg(long, requires = "kappa")]
    pub kappa0: Option<f64>,
    /// Wavenumber.
    #[arg(long, requires_all = ["r0", "r"])]
    pub k: Option<f64>,
    /// Source radius.
    #[arg(long, requires_all = ["k", "r"])]
    pub r0: Option<f64>,
    /// Measurement radius.
    #[arg(long, requires_all = ["k", "r0"])]
    pub r: Option<f64>,
}

impl GeometryArgs {
    pub fn geometry(&self) -> Result<ProblemGeometry, IspError> {
        match (self.kappa0, self.kappa, self.k, self.r0, self.r) {
            (Some(kappa0), Some(kappa), None, None, None) => {
                ProblemGeometry::from_size_parameters(kappa0, kappa)
            }
            (None, None, Some(k), Some(r0), Some(r)) => ProblemGeometry::new(k, r0, r),
            _ => Err(IspError::InvalidArgument(
                "give either --kappa0 and --kappa, or --k, --r0 and --r".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    /// Largest angular frequency; defaults to ceil(kappa0) + ceil(3 kappa0^(1/3)) + 40.
    #[arg(long)]
    pub mmax: Option<usize>,
    /// Also read the bandwidth off the table (fails with exit code 3 if the table is too short).
    #[arg(long)]
    pub bandwidth: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BandwidthArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long)]
    pub mmax: Option<usize>,
    /// Format of the file written with --out; the summary line always goes to stdout.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long, default_value_t = 2.0)]
    pub kappa_min: f64,
    #[arg(long, default_value_t = 100.0 * std::f64::consts::PI)]
    pub kappa_max: f64,
    /// kappa / kappa0 at every grid point.
    #[arg(long, default_value_t = 1.0)]
    pub ratio: f64,
    /// Output directory for sweep.csv and fits.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Gauss-Legendre radii of the source grid.
    #[arg(long, default_value_t = 48)]
    pub nr: usize,
    /// Uniform angles of the source grid.
    #[arg(long, default_value_t = 128)]
    pub ntheta: usize,
    /// Boundary samples.
    #[arg(long, default_value_t = 256)]
    pub ns: usize,
    /// Highest mode used to synthesize data.
    #[arg(long, default_value_t = 60)]
    pub modes: usize,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Built-in source, e.g. `mode:2+0.5i*mode:-9`.
    #[arg(long)]
    pub source: String,
    /// Noise RMS relative to the RMS of the clean data.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    #[value(name = "B")]
    B,
    #[value(name = "B-")]
    BMinus,
    #[value(name = "B+")]
    BPlus,
    #[value(name = "N")]
    N,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Boundary data CSV; its geometry overrides the flags.
    #[arg(long, conflicts_with = "source")]
    pub data: Option<PathBuf>,
    /// Built-in source to synthesize data from; enables the error report.
    #[arg(long)]
    pub source: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = PolicyArg::B)]
    pub policy: PolicyArg,
    /// Truncation index for --policy N.
    #[arg(long = "N", required_if_eq("policy", "N"))]
    pub n: Option<i64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
