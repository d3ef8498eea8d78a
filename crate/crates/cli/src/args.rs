use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use okm_core::dataio::DEFAULT_LABEL_SEPARATOR;
use okm_core::divergences::DEFAULT_IDIV_EPSILON;
use okm_core::model_selection::DEFAULT_TAU;
use okm_core::okm::{DEFAULT_MAX_ITER, DEFAULT_REL_TOL};
use okm_core::{Dissimilarity, KernelSpec, LabelColumn, PolicyKind, SignificancePolicy};

#[derive(Debug, Parser)]
#[command(name = "okm", version, about = "Overlapping k-means experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the number of clusters from the Gram-matrix spectrum
    EstimateK(EstimateArgs),
    /// Run OKM once and write the covering as CSV
    Cluster(ClusterArgs),
    /// Run OKM from several seeds and score each run against ground truth
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Input CSV file
    #[arg(long)]
    pub data: PathBuf,
    /// Label column: `last`, `NONE` or a zero-based index
    #[arg(long = "label-col")]
    pub label_col: Option<LabelColumn>,
    /// Separator between labels inside the label column
    #[arg(long = "label-sep", default_value_t = DEFAULT_LABEL_SEPARATOR)]
    pub label_sep: char,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelKind {
    Rbf,
    Poly,
    Linear,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value_t = KernelKind::Rbf)]
    pub kernel: KernelKind,
    /// RBF bandwidth
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Polynomial degree
    #[arg(long, default_value_t = 2.0)]
    pub degree: f64,
}

impl KernelArgs {
    pub fn spec(&self) -> KernelSpec {
        match self.kernel {
            KernelKind::Rbf => KernelSpec::Rbf { sigma: self.sigma },
            KernelKind::Poly => KernelSpec::Polynomial {
                degree: self.degree,
            },
            KernelKind::Linear => KernelSpec::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureKind {
    Euclidean,
    Idiv,
    Kernel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Eigengap,
    Ratio,
}

#[derive(Debug, Clone, Args)]
pub struct PolicyArgs {
    #[arg(long, value_enum, default_value_t = PolicyArg::Eigengap)]
    pub policy: PolicyArg,
    /// Ratio threshold for `--policy ratio`
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
}

impl PolicyArgs {
    pub fn policy(&self) -> SignificancePolicy {
        SignificancePolicy {
            kind: match self.policy {
                PolicyArg::Eigengap => PolicyKind::LargestEigengap,
                PolicyArg::Ratio => PolicyKind::RatioThreshold,
            },
            tau: self.tau,
            max_k: None,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OkmArgs {
    #[arg(long, value_enum, default_value_t = MeasureKind::Euclidean)]
    pub measure: MeasureKind,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long = "max-iter", default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long = "rel-tol", default_value_t = DEFAULT_REL_TOL)]
    pub rel_tol: f64,
}

impl OkmArgs {
    pub fn dissimilarity(&self) -> Dissimilarity {
        match self.measure {
            MeasureKind::Euclidean => Dissimilarity::SquaredEuclidean,
            MeasureKind::Idiv => Dissimilarity::IDivergence {
                epsilon: DEFAULT_IDIV_EPSILON,
            },
            MeasureKind::Kernel => Dissimilarity::kernel(self.kernel.spec()),
        }
    }

    /// Kernel used when the number of clusters has to be estimated.
    pub fn estimation_kernel(&self) -> KernelSpec {
        match self.measure {
            MeasureKind::Kernel => self.kernel.spec(),
            _ => KernelSpec::Rbf {
                sigma: self.kernel.sigma,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub okm: OkmArgs,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Covering CSV destination (stdout when absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub okm: OkmArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// Number of clusters (estimated from the Gram spectrum when absent)
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Seed of the first run; run `i` uses `seed + i`
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl DataArgs {
    pub fn label_column(&self, default: LabelColumn) -> LabelColumn {
        self.label_col.unwrap_or(default)
    }
}
