use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use logshrink::estimator::GridSpec;
use logshrink::{EstimatorMethod, ModelId};

#[derive(Debug, Parser)]
#[command(name = "logshrink", version, about = "Covariance shrinkage with penalties on the matrix logarithm")]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one estimator at a fixed penalty weight.
    Fit(FitArgs),
    /// Choose the penalty weight by validation loss and fit.
    Tune(TuneArgs),
    /// Monte Carlo comparison on covariance models 1-4.
    Simulate(SimulateArgs),
    /// LDA misclassification study on a labelled two-class data set.
    Classify(ClassifyArgs),
    /// Numerical convexity and identity probes.
    Verify(VerifyArgs),
}

/// A sample covariance given directly or computed from observations.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct CovInput {
    /// Covariance matrix CSV (square, optional header).
    #[arg(long)]
    pub cov: Option<PathBuf>,
    /// Observations CSV (rows are observations).
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Centering {
    /// Subtract column means before forming the covariance (default).
    #[arg(long, overrides_with = "non_centered")]
    pub centered: bool,
    /// Use n⁻¹ Σ xᵢxᵢᵀ without mean subtraction.
    #[arg(long)]
    pub non_centered: bool,
}

impl Centering {
    pub fn centered(&self) -> bool {
        !self.non_centered
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: CovInput,
    #[command(flatten)]
    pub centering: Centering,
    /// S, LogF, sLogF, mLogF or dLogF.
    #[arg(long)]
    pub method: EstimatorMethod,
    /// Additive constant on the mLogF centre.
    #[arg(long, default_value_t = 0.0)]
    pub bias: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub input: CovInput,
    /// Validation covariance CSV.
    #[arg(long, conflicts_with = "valid_data", required_unless_present = "valid_data")]
    pub valid_cov: Option<PathBuf>,
    /// Validation observations CSV.
    #[arg(long)]
    pub valid_data: Option<PathBuf>,
    #[command(flatten)]
    pub centering: Centering,
    #[arg(long)]
    pub method: EstimatorMethod,
    #[arg(long, default_value_t = 0.0)]
    pub bias: f64,
    /// min,max,count,log|lin (a log grid also includes 0).
    #[arg(long, default_value = "0.001,10000,60,log")]
    pub grid: GridSpec,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON configuration; explicit flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Models to run (1-4), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub model: Vec<ModelId>,
    /// Sample sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Methods, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<EstimatorMethod>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub grid: Option<GridSpec>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Criterion {
    ValidationError,
    ValidationGaussLoss,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Pooling {
    Total,
    Unbiased,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    /// CSV of numeric features followed by a class label column.
    #[arg(long)]
    pub data: PathBuf,
    /// The first line is a header.
    #[arg(long)]
    pub header: bool,
    /// Expected number of feature columns; 0 accepts any consistent width.
    #[arg(long, default_value_t = 60)]
    pub features: usize,
    #[arg(long, default_value_t = 78)]
    pub train: usize,
    #[arg(long, default_value_t = 78)]
    pub validation: usize,
    #[arg(long, default_value_t = 52)]
    pub test: usize,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, value_delimiter = ',', default_value = "sLogF,dLogF,mLogF,LogF,S")]
    pub methods: Vec<EstimatorMethod>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = "0.001,10000,60,log")]
    pub grid: GridSpec,
    #[arg(long, value_enum, default_value = "validation-error")]
    pub criterion: Criterion,
    #[arg(long, value_enum, default_value = "total")]
    pub pooling: Pooling,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Random pairs per probe.
    #[arg(long, default_value_t = 1000)]
    pub pairs: usize,
    /// Dimension of random matrices.
    #[arg(long, default_value_t = 5)]
    pub q: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}
