//! Argument parsing.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use maternact::nn::Reduction;
use maternact::Result;

use crate::commands::{self, ActivationDumpConfig, EigenbasisConfig, GramConfig};
use crate::experiments::{
    ActivationChoice, Classify2dConfig, KernelCheckConfig, Regress1dConfig, TabularConfig, ToyTraining,
};

#[derive(Debug, Parser)]
#[command(name = "maternact", version, about = "Matérn activation experiments")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// MC kernel of a Matérn layer against the closed-form kernel.
    KernelCheck(KernelCheckArgs),
    /// GP and MC-dropout MLP on the two-cluster 1D regression task.
    #[command(name = "regress-1d")]
    Regress1d(Regress1dArgs),
    /// MC-dropout classifier on a 2D two-class task with a grid of predictions.
    #[command(name = "classify-2d")]
    Classify2d(Classify2dArgs),
    /// k-fold cross-validation on a tabular CSV.
    Tabular(TabularArgs),
    /// Activation values and derivatives on a grid.
    ActivationDump(ActivationDumpArgs),
    /// Eigenvalues and eigenfunctions of the RBF kernel.
    Eigenbasis(EigenbasisArgs),
    /// Gram matrix of the locally stationary Matérn network kernel.
    Gram(GramArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReductionArg {
    MeanOfSoftmax,
    SoftmaxOfMean,
}

impl From<ReductionArg> for Reduction {
    fn from(r: ReductionArg) -> Self {
        match r {
            ReductionArg::MeanOfSoftmax => Reduction::MeanOfSoftmax,
            ReductionArg::SoftmaxOfMean => Reduction::SoftmaxOfMean,
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct KernelCheckArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.5)]
    pub nu: f64,
    #[arg(long, default_value_t = 1.0)]
    pub ell: f64,
    #[arg(long = "sigma-b2", default_value_t = 1.0)]
    pub sigma_b2: f64,
    /// Number of random features.
    #[arg(long = "K", default_value_t = 10_000)]
    pub k: usize,
    #[arg(long, default_value_t = 161)]
    pub points: usize,
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    pub x_max: f64,
}

#[derive(Debug, Args)]
pub struct TrainingArgs {
    #[arg(long, default_value_t = 50)]
    pub hidden: usize,
    #[arg(long, default_value_t = 0.2)]
    pub dropout: f64,
    #[arg(long, default_value_t = 2000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.02)]
    pub lr: f64,
    #[arg(long, value_delimiter = ',', default_value = "250,500,1000")]
    pub lr_decay_epochs: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub lr_decay_factor: f64,
}

impl TrainingArgs {
    fn toy(&self, mc_samples: usize) -> ToyTraining {
        ToyTraining {
            hidden: self.hidden,
            dropout: self.dropout,
            epochs: self.epochs,
            learning_rate: self.lr,
            lr_decay_epochs: self.lr_decay_epochs.clone(),
            lr_decay_factor: self.lr_decay_factor,
            mc_samples,
        }
    }
}

#[derive(Debug, Args)]
pub struct Regress1dArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[arg(long, value_enum, default_value = "matern52")]
    pub activation: ActivationChoice,
    /// Overrides the order of a Matérn activation and of the GP kernel.
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub ell: f64,
    #[arg(long, default_value_t = 1000)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 20)]
    pub repeats: usize,
    #[arg(long, default_value_t = 100)]
    pub grid_points: usize,
    /// GP observation noise variance.
    #[arg(long, default_value_t = 4e-4)]
    pub noise_var: f64,
}

#[derive(Debug, Args)]
pub struct Classify2dArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub training: TrainingArgs,
    #[arg(long, value_enum, default_value = "matern52")]
    pub activation: ActivationChoice,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub ell: f64,
    #[arg(long, default_value_t = 5000)]
    pub mc_samples: usize,
    #[arg(long, default_value_t = 400)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 300)]
    pub grid_points: usize,
    #[arg(long, value_enum, default_value = "mean-of-softmax")]
    pub reduction: ReductionArg,
    /// CSV with columns x1, x2, label; generated data is used otherwise.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value_t = 183)]
    pub class0: usize,
    #[arg(long, default_value_t = 217)]
    pub class1: usize,
}

#[derive(Debug, Args)]
pub struct TabularArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub data: PathBuf,
    /// Schema JSON: {"columns": [{"name": ..., "kind": "continuous|categorical|label|ignore"}]}.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Label column when no schema is given; all other columns are continuous.
    #[arg(long, default_value = "class")]
    pub label: String,
    #[arg(long, value_enum, default_value = "matern32")]
    pub activation: ActivationChoice,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub ell: f64,
    #[arg(long, value_delimiter = ',', default_value = "1000,1000,500,50")]
    pub hidden: Vec<usize>,
    #[arg(long, default_value_t = 0.2)]
    pub dropout: f64,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 500)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long, value_delimiter = ',', default_value = "10,15")]
    pub lr_decay_epochs: Vec<usize>,
    #[arg(long, default_value_t = 0.1)]
    pub lr_decay_factor: f64,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 100)]
    pub mc_samples: usize,
    #[arg(long, value_enum, default_value = "mean-of-softmax")]
    pub reduction: ReductionArg,
}

#[derive(Debug, Args)]
pub struct ActivationDumpArgs {
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "matern32")]
    pub activation: ActivationChoice,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub ell: f64,
    #[arg(long, default_value_t = -2.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 601)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct EigenbasisArgs {
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Number of eigenpairs.
    #[arg(long, default_value_t = 10)]
    pub terms: usize,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 301)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct GramArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1.5)]
    pub nu: f64,
    #[arg(long, default_value_t = 0.5)]
    pub ell: f64,
    #[arg(long = "sigma-b2", default_value_t = 1.0)]
    pub sigma_b2: f64,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// Also write a Monte Carlo Gram matrix from this many random features.
    #[arg(long = "K")]
    pub k: Option<usize>,
}

/// Runs the parsed command.
pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::KernelCheck(a) => {
            let cfg = KernelCheckConfig {
                nu: a.nu,
                ell: a.ell,
                sigma_b2: a.sigma_b2,
                k: a.k,
                seed: a.common.seed,
                n_points: a.points,
                x_min: a.x_min,
                x_max: a.x_max,
            };
            commands::run_kernel_check(&cfg, &commands::ensure_dir(&a.common.out_dir)?)
        }
        Command::Regress1d(a) => {
            let cfg = Regress1dConfig {
                activation: a.activation,
                nu: a.nu,
                ell: a.ell,
                training: a.training.toy(a.mc_samples),
                repeats: a.repeats,
                grid_points: a.grid_points,
                gp_noise_var: a.noise_var,
                seed: a.common.seed,
            };
            commands::run_regress_1d(&cfg, &commands::ensure_dir(&a.common.out_dir)?)
        }
        Command::Classify2d(a) => {
            let cfg = Classify2dConfig {
                activation: a.activation,
                nu: a.nu,
                ell: a.ell,
                training: a.training.toy(a.mc_samples),
                batch_size: a.batch_size,
                grid_points: a.grid_points,
                grid_half_width: 3.75,
                reduction: a.reduction.into(),
                data: a.data,
                class_counts: (a.class0, a.class1),
                seed: a.common.seed,
            };
            commands::run_classify_2d(&cfg, &commands::ensure_dir(&a.common.out_dir)?)
        }
        Command::Tabular(a) => {
            let cfg = TabularConfig {
                data: a.data,
                schema: a.schema,
                label_column: a.label,
                activation: a.activation,
                nu: a.nu,
                ell: a.ell,
                hidden: a.hidden,
                dropout: a.dropout,
                epochs: a.epochs,
                batch_size: a.batch_size,
                learning_rate: a.lr,
                lr_decay_epochs: a.lr_decay_epochs,
                lr_decay_factor: a.lr_decay_factor,
                folds: a.folds,
                mc_samples: a.mc_samples,
                reduction: a.reduction.into(),
                seed: a.common.seed,
            };
            commands::run_tabular(&cfg, &commands::ensure_dir(&a.common.out_dir)?)
        }
        Command::ActivationDump(a) => {
            let cfg = ActivationDumpConfig {
                activation: a.activation,
                nu: a.nu,
                ell: a.ell,
                x_min: a.x_min,
                x_max: a.x_max,
                points: a.points,
            };
            commands::run_activation_dump(&cfg, &commands::ensure_dir(&a.out_dir)?)
        }
        Command::Eigenbasis(a) => {
            let cfg = EigenbasisConfig {
                alpha: a.alpha,
                beta: a.beta,
                terms: a.terms,
                x_min: a.x_min,
                x_max: a.x_max,
                points: a.points,
            };
            commands::run_eigenbasis(&cfg, &commands::ensure_dir(&a.out_dir)?)
        }
        Command::Gram(a) => {
            let cfg = GramConfig {
                nu: a.nu,
                ell: a.ell,
                sigma_b2: a.sigma_b2,
                x_min: a.x_min,
                x_max: a.x_max,
                points: a.points,
                k: a.k,
                seed: a.common.seed,
            };
            commands::run_gram(&cfg, &commands::ensure_dir(&a.common.out_dir)?)
        }
    }
}
