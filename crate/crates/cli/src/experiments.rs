//! Experiment pipelines. Each returns its numbers; writing files is left to
//! the command layer.

use std::path::PathBuf;

use ndarray::{Array1, Array2, Axis};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use maternact::activations::ActivationKind;
use maternact::data::{self, kfold, load_csv, Dataset, Preprocessor, Schema};
use maternact::gp::GpRegressor;
use maternact::kernels::{matnn_kernel, EnvelopeParams, MaternKernel, MaternParams};
use maternact::mc_kernel::{calibrate_scale, kernel_curve, BiasPrior, RandomFeatureConfig, WeightPrior};
use maternact::metrics::{self, bernoulli_std, MetricReport};
use maternact::nn::{mc_predict_batch, one_hot, train, LayerSpec, Loss, McOptions, Network, Reduction, TrainConfig};
use maternact::{Error, Result};

/// Activation choices exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ActivationChoice {
    Matern12,
    Matern32,
    Matern52,
    Rbf,
    Relu,
    Step,
    Erf,
}

impl ActivationChoice {
    pub fn default_nu(self) -> Option<f64> {
        match self {
            ActivationChoice::Matern12 => Some(0.5),
            ActivationChoice::Matern32 => Some(1.5),
            ActivationChoice::Matern52 => Some(2.5),
            _ => None,
        }
    }

    /// `nu` overrides the order of the Matérn choices; RBF uses width ℓ.
    pub fn build(self, nu: Option<f64>, ell: f64) -> Result<ActivationKind> {
        match self {
            ActivationChoice::Matern12 | ActivationChoice::Matern32 | ActivationChoice::Matern52 => {
                ActivationKind::matern(nu.or(self.default_nu()).expect("matern order"), ell)
            }
            ActivationChoice::Rbf => ActivationKind::rbf(0.0, ell),
            ActivationChoice::Relu => Ok(ActivationKind::Relu),
            ActivationChoice::Step => Ok(ActivationKind::Step),
            ActivationChoice::Erf => Ok(ActivationKind::Erf),
        }
    }
}

/// n evenly spaced points from a to b inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Independent child seeds drawn from one parent seed.
pub fn split_seeds(seed: u64, n: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(7);
    (0..n).map(|_| rng.next_u64()).collect()
}

fn column(v: &[f64]) -> Array2<f64> {
    Array2::from_shape_vec((v.len(), 1), v.to_vec()).expect("column shape")
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let m = mean(v);
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64;
    (m, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCheckConfig {
    pub nu: f64,
    pub ell: f64,
    pub sigma_b2: f64,
    pub k: usize,
    pub seed: u64,
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
}

impl Default for KernelCheckConfig {
    fn default() -> Self {
        KernelCheckConfig {
            nu: 1.5,
            ell: 1.0,
            sigma_b2: 1.0,
            k: 10_000,
            seed: 0,
            n_points: 161,
            x_min: -4.0,
            x_max: 4.0,
        }
    }
}

/// Only points whose calibrated exact value exceeds this enter the deviation.
pub const KERNEL_CHECK_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelCheck {
    pub x: Vec<f64>,
    pub exact: Vec<f64>,
    pub mc_binary: Vec<f64>,
    pub mc_gaussian: Vec<f64>,
    pub scale: f64,
    pub max_rel_dev: f64,
    pub max_rel_dev_gaussian: f64,
    pub n_compared: usize,
}

/// MC kernel of a Matérn-activation layer against the reference point 0,
/// next to the locally stationary closed form scaled to the MC value at the
/// origin.
pub fn kernel_check(cfg: &KernelCheckConfig) -> Result<KernelCheck> {
    if cfg.n_points < 2 || !(cfg.x_max > cfg.x_min) {
        return Err(Error::Domain("kernel-check grid needs at least 2 points on a non-empty range".into()));
    }
    let act = ActivationKind::matern(cfg.nu, cfg.ell)?;
    let bias = BiasPrior::new(cfg.sigma_b2)?;
    let bin = RandomFeatureConfig::new(WeightPrior::BinaryWhite, bias, cfg.k, cfg.seed)?;
    let gauss = RandomFeatureConfig::new(WeightPrior::Gaussian { variance: 1.0 }, bias, cfg.k, cfg.seed)?;
    let x = linspace(cfg.x_min, cfg.x_max, cfg.n_points);
    let grid = column(&x);
    let mc_binary = kernel_curve(&bin, &act, &[0.0], grid.view())?;
    let mc_gaussian = kernel_curve(&gauss, &act, &[0.0], grid.view())?;
    let scale = calibrate_scale(&bin, &act, 1)?;
    let p = MaternParams::new(cfg.nu, cfg.ell)?;
    let e = EnvelopeParams::new(cfg.sigma_b2, cfg.ell)?;
    let exact = x
        .iter()
        .map(|&xi| matnn_kernel(&p, &e, scale, &[0.0], &[xi]))
        .collect::<Result<Vec<f64>>>()?;
    let mut max_rel_dev = 0.0f64;
    let mut max_rel_dev_gaussian = 0.0f64;
    let mut n_compared = 0;
    for i in 0..x.len() {
        if exact[i] > KERNEL_CHECK_THRESHOLD {
            n_compared += 1;
            max_rel_dev = max_rel_dev.max(((mc_binary[i] - exact[i]) / exact[i]).abs());
            max_rel_dev_gaussian = max_rel_dev_gaussian.max(((mc_gaussian[i] - exact[i]) / exact[i]).abs());
        }
    }
    Ok(KernelCheck {
        x,
        exact,
        mc_binary,
        mc_gaussian,
        scale,
        max_rel_dev,
        max_rel_dev_gaussian,
        n_compared,
    })
}

/// Optimizer and dropout settings shared by the toy tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyTraining {
    pub hidden: usize,
    pub dropout: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub lr_decay_epochs: Vec<usize>,
    pub lr_decay_factor: f64,
    pub mc_samples: usize,
}

impl ToyTraining {
    pub fn toy_defaults(mc_samples: usize) -> Self {
        ToyTraining {
            hidden: 50,
            dropout: 0.2,
            epochs: 2000,
            learning_rate: 0.02,
            lr_decay_epochs: vec![250, 500, 1000],
            lr_decay_factor: 0.1,
            mc_samples,
        }
    }

    fn network(&self, act: ActivationKind, d_in: usize, d_out: usize, seed: u64) -> Result<Network> {
        Network::init(
            &[
                LayerSpec::new(d_in, self.hidden, act, self.dropout)?,
                LayerSpec::new(self.hidden, d_out, ActivationKind::Identity, 0.0)?,
            ],
            seed,
        )
    }

    fn train_config(&self, batch_size: usize, seed: u64, loss: Loss) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size,
            learning_rate: self.learning_rate,
            lr_decay_epochs: self.lr_decay_epochs.clone(),
            lr_decay_factor: self.lr_decay_factor,
            seed,
            loss,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regress1dConfig {
    pub activation: ActivationChoice,
    pub nu: Option<f64>,
    pub ell: f64,
    pub training: ToyTraining,
    pub repeats: usize,
    pub grid_points: usize,
    pub gp_noise_var: f64,
    pub seed: u64,
}

impl Default for Regress1dConfig {
    fn default() -> Self {
        Regress1dConfig {
            activation: ActivationChoice::Matern52,
            nu: None,
            ell: 1.0,
            training: ToyTraining::toy_defaults(1000),
            repeats: 20,
            grid_points: 100,
            gp_noise_var: data::REGRESSION_NOISE_STD * data::REGRESSION_NOISE_STD,
            seed: 0,
        }
    }
}

/// Inputs at which the predictive spread is reported separately.
pub const REGRESSION_PROBES: [f64; 5] = [-2.4, -1.0, 0.0, 1.0, 2.4];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Regress1d {
    pub gp: Curve,
    pub mlp: Curve,
    /// Spread at `REGRESSION_PROBES`.
    pub gp_probe_std: Vec<f64>,
    pub mlp_probe_std: Vec<f64>,
    pub repeats_ok: usize,
    pub repeats_diverged: usize,
}

/// GP with the Matérn kernel of the chosen order, and MC-dropout MLPs
/// averaged over repeats, on the two-cluster regression task.
pub fn regress_1d(cfg: &Regress1dConfig) -> Result<Regress1d> {
    if cfg.repeats == 0 || cfg.grid_points < 2 {
        return Err(Error::Domain("need at least one repeat and two grid points".into()));
    }
    let d = data::gen_regression_1d(cfg.seed);
    let y = Array1::from(d.y.real().expect("real targets").to_vec());
    let mut x_eval = linspace(-2.5, 2.5, cfg.grid_points);
    let n_grid = x_eval.len();
    x_eval.extend(REGRESSION_PROBES);
    let xe = column(&x_eval);

    let gp_nu = cfg.nu.or(cfg.activation.default_nu()).unwrap_or(2.5);
    let gp = GpRegressor::fit(
        MaternKernel(MaternParams::new(gp_nu, cfg.ell)?),
        d.x.view(),
        y.view(),
        cfg.gp_noise_var,
        0.0,
    )?;
    let gp_pred = gp.predict_batch(xe.view())?;
    let gp_mean: Vec<f64> = gp_pred.iter().map(|p| p.0).collect();
    let gp_std: Vec<f64> = gp_pred.iter().map(|p| p.1.sqrt()).collect();

    let act = cfg.activation.build(cfg.nu, cfg.ell)?;
    let yt = column(y.as_slice().expect("contiguous"));
    let mut sum_mean = vec![0.0; x_eval.len()];
    let mut sum_std = vec![0.0; x_eval.len()];
    let mut ok = 0;
    let mut diverged = 0;
    for (r, s) in split_seeds(cfg.seed, cfg.repeats).into_iter().enumerate() {
        let seeds = split_seeds(s, 3);
        let mut net = cfg.training.network(act, 1, 1, seeds[0])?;
        let tc = cfg.training.train_config(d.len(), seeds[1], Loss::SquaredError);
        match train(&mut net, d.x.view(), yt.view(), &tc) {
            Ok(_) => {}
            Err(Error::Training { epoch, loss }) => {
                log::warn!("repeat {r} diverged at epoch {epoch} (loss {loss})");
                diverged += 1;
                continue;
            }
            Err(e) => return Err(e),
        }
        let mc = mc_predict_batch(&net, xe.view(), cfg.training.mc_samples, seeds[2], McOptions::default())?;
        for i in 0..x_eval.len() {
            sum_mean[i] += mc.mean[[i, 0]];
            sum_std[i] += mc.std[[i, 0]];
        }
        ok += 1;
    }
    if ok == 0 {
        return Err(Error::Training {
            epoch: cfg.training.epochs,
            loss: f64::NAN,
        });
    }
    let k = ok as f64;
    let mlp_mean: Vec<f64> = sum_mean.iter().map(|v| v / k).collect();
    let mlp_std: Vec<f64> = sum_std.iter().map(|v| v / k).collect();
    let split = |v: &[f64]| (v[..n_grid].to_vec(), v[n_grid..].to_vec());
    let (gm, _) = split(&gp_mean);
    let (gs, gps) = split(&gp_std);
    let (mm, _) = split(&mlp_mean);
    let (ms, mps) = split(&mlp_std);
    let xg = x_eval[..n_grid].to_vec();
    Ok(Regress1d {
        gp: Curve { x: xg.clone(), mean: gm, std: gs },
        mlp: Curve { x: xg, mean: mm, std: ms },
        gp_probe_std: gps,
        mlp_probe_std: mps,
        repeats_ok: ok,
        repeats_diverged: diverged,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classify2dConfig {
    pub activation: ActivationChoice,
    pub nu: Option<f64>,
    pub ell: f64,
    pub training: ToyTraining,
    pub batch_size: usize,
    pub grid_points: usize,
    pub grid_half_width: f64,
    pub reduction: Reduction,
    /// CSV with columns x1, x2, label; the generator is used when absent.
    pub data: Option<PathBuf>,
    pub class_counts: (usize, usize),
    pub seed: u64,
}

impl Default for Classify2dConfig {
    fn default() -> Self {
        Classify2dConfig {
            activation: ActivationChoice::Matern52,
            nu: None,
            ell: 0.5,
            training: ToyTraining::toy_defaults(5000),
            batch_size: 400,
            grid_points: 300,
            grid_half_width: 3.75,
            reduction: Reduction::MeanOfSoftmax,
            data: None,
            class_counts: data::BANANA_DEFAULT_COUNTS,
            seed: 0,
        }
    }
}

/// Grid points farther than this from the origin count as out of distribution.
pub const OOD_RADIUS: f64 = 3.2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classify2d {
    /// Grid rows (x1, x2), x1 varying slowest.
    #[serde(skip)]
    pub grid: Array2<f64>,
    #[serde(skip)]
    pub p_class1: Vec<f64>,
    #[serde(skip)]
    pub bernoulli_std: Vec<f64>,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub mean_std_ood: f64,
    pub mean_std_train: f64,
    pub locality_ratio: f64,
    pub n_train: usize,
    pub n_test: usize,
}

fn load_2d(path: &std::path::Path, seed: u64) -> Result<(Dataset, Dataset)> {
    let schema = Schema::all_continuous(&["x1", "x2", "label"], "label");
    let table = load_csv(path, &schema)?;
    let identity = Preprocessor {
        encoders: vec![
            maternact::data::Encoder::Scaled { name: "x1".into(), mean: 0.0, std: 1.0 },
            maternact::data::Encoder::Scaled { name: "x2".into(), mean: 0.0, std: 1.0 },
        ],
    };
    // 80/20 split of a seeded shuffle.
    let folds = kfold(table.len(), 5, seed)?;
    let (train_idx, test_idx) = &folds[0];
    Ok((identity.transform(&table, train_idx)?.0, identity.transform(&table, test_idx)?.0))
}

fn class_labels(d: &Dataset) -> Result<&[usize]> {
    d.y.labels().ok_or_else(|| Error::Domain("dataset has no class labels".into()))
}

/// Trains the single-hidden-layer classifier and maps predictive spread on a
/// square grid.
pub fn classify_2d(cfg: &Classify2dConfig) -> Result<Classify2d> {
    let seeds = split_seeds(cfg.seed, 5);
    let (train_set, test_set) = match &cfg.data {
        Some(p) => load_2d(p, seeds[0])?,
        None => {
            let (a, b) = cfg.class_counts;
            (
                data::gen_banana_like(seeds[0], a, b)?,
                data::gen_banana_like(seeds[1], a, b)?,
            )
        }
    };
    let labels = class_labels(&train_set)?;
    let c = train_set.y.n_classes().unwrap_or(2).max(2);
    let act = cfg.activation.build(cfg.nu, cfg.ell)?;
    let mut net = cfg.training.network(act, train_set.dim(), c, seeds[2])?;
    let tc = cfg.training.train_config(cfg.batch_size, seeds[3], Loss::SoftmaxCrossEntropy);
    train(&mut net, train_set.x.view(), one_hot(labels, c)?.view(), &tc)?;

    let g = linspace(-cfg.grid_half_width, cfg.grid_half_width, cfg.grid_points);
    let mut grid = Array2::zeros((g.len() * g.len(), 2));
    for (i, &a) in g.iter().enumerate() {
        for (j, &b) in g.iter().enumerate() {
            grid[[i * g.len() + j, 0]] = a;
            grid[[i * g.len() + j, 1]] = b;
        }
    }
    let n_grid = grid.nrows();
    let all = ndarray::concatenate(Axis(0), &[grid.view(), train_set.x.view(), test_set.x.view()])
        .map_err(|e| Error::Domain(e.to_string()))?;
    let opts = McOptions {
        retain_samples: false,
        reduction: Some(cfg.reduction),
    };
    let mc = mc_predict_batch(&net, all.view(), cfg.training.mc_samples, seeds[4], opts)?;
    let probs = mc.probs.expect("reduction requested");
    let p1: Vec<f64> = probs.column(1).to_vec();
    let sd: Vec<f64> = p1.iter().map(|&p| bernoulli_std(p)).collect();
    let n_train = train_set.len();
    let train_probs = probs.slice(ndarray::s![n_grid..n_grid + n_train, ..]);
    let test_probs = probs.slice(ndarray::s![n_grid + n_train.., ..]);
    let train_accuracy = metrics::accuracy(train_probs, labels)?;
    let test_accuracy = metrics::accuracy(test_probs, class_labels(&test_set)?)?;
    let ood: Vec<f64> = (0..n_grid)
        .filter(|&i| grid[[i, 0]].hypot(grid[[i, 1]]) > OOD_RADIUS)
        .map(|i| sd[i])
        .collect();
    let mean_std_ood = mean(&ood);
    let mean_std_train = mean(&sd[n_grid..n_grid + n_train]);
    Ok(Classify2d {
        p_class1: p1[..n_grid].to_vec(),
        bernoulli_std: sd[..n_grid].to_vec(),
        grid,
        train_accuracy,
        test_accuracy,
        mean_std_ood,
        mean_std_train,
        locality_ratio: mean_std_ood / mean_std_train,
        n_train,
        n_test: test_set.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularConfig {
    pub data: PathBuf,
    /// Schema JSON; when absent every column but `label_column` is continuous.
    pub schema: Option<PathBuf>,
    pub label_column: String,
    pub activation: ActivationChoice,
    pub nu: Option<f64>,
    pub ell: f64,
    pub hidden: Vec<usize>,
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub lr_decay_epochs: Vec<usize>,
    pub lr_decay_factor: f64,
    pub folds: usize,
    pub mc_samples: usize,
    pub reduction: Reduction,
    pub seed: u64,
}

impl TabularConfig {
    pub fn new(data: PathBuf) -> Self {
        TabularConfig {
            data,
            schema: None,
            label_column: "class".into(),
            activation: ActivationChoice::Matern32,
            nu: None,
            ell: 0.5,
            hidden: vec![1000, 1000, 500, 50],
            dropout: 0.2,
            epochs: 20,
            batch_size: 500,
            learning_rate: 1e-4,
            lr_decay_epochs: vec![10, 15],
            lr_decay_factor: 0.1,
            folds: 10,
            mc_samples: 100,
            reduction: Reduction::MeanOfSoftmax,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tabular {
    pub folds: Vec<MetricReport>,
    pub accuracy: Summary,
    pub nlpd: Summary,
    pub auc: Option<Summary>,
    pub n: usize,
    pub d: usize,
    pub c: usize,
    pub dropped_rows: usize,
    pub unknown_levels: usize,
}

fn summarize(v: &[f64]) -> Summary {
    let (mean, std) = mean_std(v);
    Summary { mean, std }
}

/// Architecture for tabular data: ReLU hidden layers, the chosen activation
/// with dropout on the last hidden layer, linear output.
pub fn tabular_arch(d: usize, c: usize, hidden: &[usize], act: ActivationKind, dropout: f64) -> Result<Vec<LayerSpec>> {
    if hidden.is_empty() {
        return Err(Error::Domain("need at least one hidden layer".into()));
    }
    let mut arch = Vec::with_capacity(hidden.len() + 1);
    let mut prev = d;
    for (i, &h) in hidden.iter().enumerate() {
        let last = i + 1 == hidden.len();
        let (a, r) = if last { (act, dropout) } else { (ActivationKind::Relu, 0.0) };
        arch.push(LayerSpec::new(prev, h, a, r)?);
        prev = h;
    }
    arch.push(LayerSpec::new(prev, c, ActivationKind::Identity, 0.0)?);
    Ok(arch)
}

/// k-fold cross-validation of the MC-dropout classifier on a CSV file.
pub fn tabular(cfg: &TabularConfig) -> Result<Tabular> {
    let schema = match &cfg.schema {
        Some(p) => Schema::from_json_file(p)?,
        None => {
            let header = data::read_header(&cfg.data)?;
            let refs: Vec<&str> = header.iter().map(String::as_str).collect();
            if !refs.contains(&cfg.label_column.as_str()) {
                return Err(Error::Load {
                    row: 1,
                    column: cfg.label_column.clone(),
                    message: "label column not found".into(),
                });
            }
            Schema::all_continuous(&refs, &cfg.label_column)
        }
    };
    let table = load_csv(&cfg.data, &schema)?;
    let c = table.classes().len();
    if c < 2 {
        return Err(Error::Domain(format!("label column has a single class; AUC is undefined (c = {c})")));
    }
    let act = cfg.activation.build(cfg.nu, cfg.ell)?;
    let seeds = split_seeds(cfg.seed, cfg.folds + 1);
    let folds = kfold(table.len(), cfg.folds, seeds[0])?;
    let mut reports = Vec::with_capacity(folds.len());
    let mut unknown = 0;
    let mut d = 0;
    for (f, (train_idx, test_idx)) in folds.iter().enumerate() {
        let pre = Preprocessor::fit(&table, train_idx)?;
        let (tr, _) = pre.transform(&table, train_idx)?;
        let (te, u) = pre.transform(&table, test_idx)?;
        unknown += u;
        d = tr.dim();
        let fs = split_seeds(seeds[f + 1], 3);
        let mut net = Network::init(&tabular_arch(d, c, &cfg.hidden, act, cfg.dropout)?, fs[0])?;
        let tc = TrainConfig {
            epochs: cfg.epochs,
            batch_size: cfg.batch_size,
            learning_rate: cfg.learning_rate,
            lr_decay_epochs: cfg.lr_decay_epochs.clone(),
            lr_decay_factor: cfg.lr_decay_factor,
            seed: fs[1],
            loss: Loss::SoftmaxCrossEntropy,
        };
        let labels = class_labels(&tr)?;
        train(&mut net, tr.x.view(), one_hot(labels, c)?.view(), &tc)?;
        let opts = McOptions {
            retain_samples: false,
            reduction: Some(cfg.reduction),
        };
        let mc = mc_predict_batch(&net, te.x.view(), cfg.mc_samples, fs[2], opts)?;
        let probs = mc.probs.expect("reduction requested");
        let r = metrics::classification_report(probs.view(), class_labels(&te)?)?;
        log::info!("fold {f}: acc {:.4} nlpd {:.4}", r.accuracy, r.mean_nlpd);
        reports.push(r);
    }
    let acc: Vec<f64> = reports.iter().map(|r| r.accuracy).collect();
    let nlpd: Vec<f64> = reports.iter().map(|r| r.mean_nlpd).collect();
    let aucs: Option<Vec<f64>> = reports.iter().map(|r| r.macro_auc).collect();
    Ok(Tabular {
        accuracy: summarize(&acc),
        nlpd: summarize(&nlpd),
        auc: aucs.map(|a| summarize(&a)),
        folds: reports,
        n: table.len(),
        d,
        c,
        dropped_rows: table.dropped_rows(),
        unknown_levels: unknown,
    })
}
