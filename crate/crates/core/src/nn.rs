//! Dense feedforward networks with MC dropout.
//!
//! Each layer computes affine → activation → dropout. Dropout is inverted:
//! kept units are scaled by 1/(1 − rate) so that `Mode::Eval` (no dropout,
//! no rescaling) is the expectation of the stochastic passes.
//!
//! Random streams (all ChaCha8, `seed_from_u64`):
//! - initialization: `seed`, weights layer by layer in row-major order;
//! - `Mode::Train { dropout_seed, step }`: stream `step` of `dropout_seed`,
//!   one mask per row, layer by layer, row-major;
//! - `Mode::McSample { sample_seed }`: stream 0 of `sample_seed`, one mask
//!   per layer shared by every row of the batch;
//! - `mc_predict*`: sample seeds are the successive `next_u64` draws of the
//!   master seed, so the first S samples do not depend on the total count.

use std::path::Path;

use ndarray::{s, Array1, Array2, Array3, ArrayView2, Axis, Zip};
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activations::ActivationKind;
use crate::error::{check_dims, Error, Result};

const CHECKPOINT_FORMAT: &str = "maternact-network";
const CHECKPOINT_VERSION: u32 = 1;
const DROPOUT_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;
const MC_CHUNK_ROWS: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: ActivationKind,
    pub dropout_rate: f64,
}

impl LayerSpec {
    pub fn new(in_dim: usize, out_dim: usize, activation: ActivationKind, dropout_rate: f64) -> Result<Self> {
        let spec = LayerSpec {
            in_dim,
            out_dim,
            activation,
            dropout_rate,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.in_dim == 0 || self.out_dim == 0 {
            return Err(Error::domain("layer dimensions must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::domain(format!(
                "dropout rate must be in [0, 1), got {}",
                self.dropout_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    spec: LayerSpec,
    /// out_dim × in_dim
    weights: Array2<f64>,
    biases: Array1<f64>,
}

impl Layer {
    pub fn spec(&self) -> &LayerSpec {
        &self.spec
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn biases(&self) -> &Array1<f64> {
        &self.biases
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train { dropout_seed: u64, step: u64 },
    Eval,
    McSample { sample_seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// Mean over rows of −Σ_c y_c log softmax(z)_c.
    SoftmaxCrossEntropy,
    /// Mean over all entries of (z − y)².
    SquaredError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    MeanOfSoftmax,
    SoftmaxOfMean,
}

/// Gradients with the same layout as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Gradients {
    /// Entry `i` in the flat parameter order of [`Network::param`].
    pub fn flat(&self, mut i: usize) -> f64 {
        for (w, b) in self.weights.iter().zip(&self.biases) {
            if i < w.len() {
                return w.as_slice().expect("standard layout")[i];
            }
            i -= w.len();
            if i < b.len() {
                return b[i];
            }
            i -= b.len();
        }
        panic!("gradient index out of range");
    }

    pub fn norm(&self) -> f64 {
        self.weights
            .iter()
            .map(|w| w.iter().map(|v| v * v).sum::<f64>())
            .chain(self.biases.iter().map(|b| b.iter().map(|v| v * v).sum::<f64>()))
            .sum::<f64>()
            .sqrt()
    }
}

struct Cache {
    inputs: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
    masks: Vec<Option<Array2<f64>>>,
}

fn dropout_scale(rate: f64, u: f64) -> f64 {
    if u < rate {
        0.0
    } else {
        1.0 / (1.0 - rate)
    }
}

impl Network {
    /// Weights from N(0, 2/(in + out)), zero biases.
    pub fn init(arch: &[LayerSpec], seed: u64) -> Result<Self> {
        validate_arch(arch)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = arch
            .iter()
            .map(|spec| {
                let sd = (2.0 / (spec.in_dim + spec.out_dim) as f64).sqrt();
                let n = Normal::new(0.0, sd).expect("positive std");
                Layer {
                    spec: *spec,
                    weights: Array2::from_shape_simple_fn((spec.out_dim, spec.in_dim), || n.sample(&mut rng)),
                    biases: Array1::zeros(spec.out_dim),
                }
            })
            .collect();
        Ok(Network { layers })
    }

    /// Builds a network from explicit parameters (weights are out × in).
    pub fn from_parameters(arch: &[LayerSpec], weights: Vec<Array2<f64>>, biases: Vec<Array1<f64>>) -> Result<Self> {
        validate_arch(arch)?;
        check_dims(arch.len(), weights.len())?;
        check_dims(arch.len(), biases.len())?;
        let mut layers = Vec::with_capacity(arch.len());
        for ((spec, w), b) in arch.iter().zip(weights).zip(biases) {
            if w.dim() != (spec.out_dim, spec.in_dim) {
                return Err(Error::domain(format!(
                    "weight shape {:?} does not match layer {}→{}",
                    w.dim(),
                    spec.in_dim,
                    spec.out_dim
                )));
            }
            check_dims(spec.out_dim, b.len())?;
            if !w.iter().chain(b.iter()).all(|v| v.is_finite()) {
                return Err(Error::domain("network parameters must be finite"));
            }
            layers.push(Layer {
                spec: *spec,
                weights: w.as_standard_layout().to_owned(),
                biases: b,
            });
        }
        Ok(Network { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn arch(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(|l| l.spec).collect()
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].spec.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().expect("non-empty").spec.out_dim
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    fn locate(&self, mut i: usize) -> (usize, Option<(usize, usize)>, usize) {
        for (l, layer) in self.layers.iter().enumerate() {
            let nw = layer.weights.len();
            if i < nw {
                let cols = layer.spec.in_dim;
                return (l, Some((i / cols, i % cols)), 0);
            }
            i -= nw;
            if i < layer.biases.len() {
                return (l, None, i);
            }
            i -= layer.biases.len();
        }
        panic!("parameter index out of range");
    }

    /// Parameter `i` in flat order: per layer, weights row-major then biases.
    pub fn param(&self, i: usize) -> f64 {
        match self.locate(i) {
            (l, Some(rc), _) => self.layers[l].weights[rc],
            (l, None, j) => self.layers[l].biases[j],
        }
    }

    pub fn set_param(&mut self, i: usize, v: f64) {
        match self.locate(i) {
            (l, Some(rc), _) => self.layers[l].weights[rc] = v,
            (l, None, j) => self.layers[l].biases[j] = v,
        }
    }

    fn first_dropout_layer(&self) -> Option<usize> {
        self.layers.iter().position(|l| l.spec.dropout_rate > 0.0)
    }

    fn train_masks(&self, n: usize, dropout_seed: u64, step: u64) -> Vec<Option<Array2<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(dropout_seed);
        rng.set_stream(step);
        self.layers
            .iter()
            .map(|l| {
                let rate = l.spec.dropout_rate;
                (rate > 0.0).then(|| {
                    Array2::from_shape_simple_fn((n, l.spec.out_dim), || dropout_scale(rate, rng.random::<f64>()))
                })
            })
            .collect()
    }

    fn shared_masks(&self, sample_seed: u64) -> Vec<Option<Array1<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
        self.layers
            .iter()
            .map(|l| {
                let rate = l.spec.dropout_rate;
                (rate > 0.0).then(|| {
                    Array1::from_shape_simple_fn(l.spec.out_dim, || dropout_scale(rate, rng.random::<f64>()))
                })
            })
            .collect()
    }

    fn check_input(&self, x: &ArrayView2<f64>) -> Result<()> {
        check_dims(self.in_dim(), x.ncols())
    }

    /// Layers `start..` on `input`. A pending mask from the previous layer is
    /// folded into this layer's weight columns.
    fn forward_from<'a>(
        &self,
        start: usize,
        input: ArrayView2<f64>,
        mut pending: Option<&'a Array1<f64>>,
        masks: Option<&'a [Option<Array1<f64>>]>,
    ) -> Array2<f64> {
        let mut cur: Option<Array2<f64>> = None;
        for l in start..self.layers.len() {
            let layer = &self.layers[l];
            let x = cur.as_ref().map(|c| c.view()).unwrap_or(input);
            let mut z = match pending {
                Some(m) => x.dot(&(&layer.weights * m).t()),
                None => x.dot(&layer.weights.t()),
            };
            z += &layer.biases;
            let act = layer.spec.activation;
            z.mapv_inplace(|v| act.apply(v));
            cur = Some(z);
            pending = masks.and_then(|m| m[l].as_ref());
        }
        let mut out = cur.unwrap_or_else(|| input.to_owned());
        if let Some(m) = pending {
            out *= m;
        }
        out
    }

    fn forward_train(&self, x: ArrayView2<f64>, dropout_seed: u64, step: u64) -> (Array2<f64>, Cache) {
        let masks = self.train_masks(x.nrows(), dropout_seed, step);
        self.forward_cached(x, masks)
    }

    fn forward_cached(&self, x: ArrayView2<f64>, masks: Vec<Option<Array2<f64>>>) -> (Array2<f64>, Cache) {
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut cur = x.to_owned();
        for (layer, mask) in self.layers.iter().zip(&masks) {
            let mut z = cur.dot(&layer.weights.t());
            z += &layer.biases;
            let act = layer.spec.activation;
            let mut a = z.mapv(|v| act.apply(v));
            if let Some(m) = mask {
                a *= m;
            }
            inputs.push(cur);
            pre.push(z);
            cur = a;
        }
        (cur, Cache { inputs, pre, masks })
    }

    /// Forward pass over the rows of `x`.
    pub fn forward_batch(&self, x: ArrayView2<f64>, mode: Mode) -> Result<Array2<f64>> {
        self.check_input(&x)?;
        Ok(match mode {
            Mode::Eval => self.forward_from(0, x, None, None),
            Mode::Train { dropout_seed, step } => self.forward_train(x, dropout_seed, step).0,
            Mode::McSample { sample_seed } => {
                let masks = self.shared_masks(sample_seed);
                match self.first_dropout_layer() {
                    None => self.forward_from(0, x, None, None),
                    Some(l0) => {
                        let prefix = self.prefix(x, l0);
                        self.forward_from(l0 + 1, prefix.view(), masks[l0].as_ref(), Some(&masks))
                    }
                }
            }
        })
    }

    pub fn forward(&self, x: &[f64], mode: Mode) -> Result<Vec<f64>> {
        let xv = ArrayView2::from_shape((1, x.len()), x).expect("row vector");
        Ok(self.forward_batch(xv, mode)?.into_raw_vec_and_offset().0)
    }

    /// Activations of layers 0..=l0 without dropout.
    fn prefix(&self, x: ArrayView2<f64>, l0: usize) -> Array2<f64> {
        let head = Network {
            layers: self.layers[..=l0].to_vec(),
        };
        head.forward_from(0, x, None, None)
    }

    pub fn loss(&self, x: ArrayView2<f64>, y: ArrayView2<f64>, loss: Loss, mode: Mode) -> Result<f64> {
        let out = self.forward_batch(x, mode)?;
        check_targets(&out, &y)?;
        Ok(loss_value(loss, &out, &y))
    }

    /// Loss and exact gradients. Only `Mode::Train` and `Mode::Eval` are
    /// supported; the gradient goes through the same masks as the forward pass.
    pub fn loss_and_grad(&self, x: ArrayView2<f64>, y: ArrayView2<f64>, loss: Loss, mode: Mode) -> Result<(f64, Gradients)> {
        self.check_input(&x)?;
        let (out, cache) = match mode {
            Mode::Train { dropout_seed, step } => self.forward_train(x, dropout_seed, step),
            Mode::Eval => self.forward_cached(x, vec![None; self.layers.len()]),
            Mode::McSample { .. } => {
                return Err(Error::Usage("gradients are defined for Train and Eval modes".into()));
            }
        };
        check_targets(&out, &y)?;
        let value = loss_value(loss, &out, &y);
        let mut delta = loss_grad(loss, &out, &y);
        let nl = self.layers.len();
        let mut gw = vec![Array2::zeros((0, 0)); nl];
        let mut gb = vec![Array1::zeros(0); nl];
        for l in (0..nl).rev() {
            let layer = &self.layers[l];
            if let Some(m) = &cache.masks[l] {
                delta *= m;
            }
            let act = layer.spec.activation;
            Zip::from(&mut delta)
                .and(&cache.pre[l])
                .for_each(|d, &z| *d *= act.derivative(z));
            gw[l] = delta.t().dot(&cache.inputs[l]);
            gb[l] = delta.sum_axis(Axis(0));
            if l > 0 {
                delta = delta.dot(&layer.weights);
            }
        }
        Ok((value, Gradients { weights: gw, biases: gb }))
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(&Checkpoint::from(self))?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(s)?;
        c.into_network()
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        crate::io::write_json(path, &Checkpoint::from(self))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Network::from_json_str(&s)
    }
}

fn validate_arch(arch: &[LayerSpec]) -> Result<()> {
    if arch.is_empty() {
        return Err(Error::domain("network needs at least one layer"));
    }
    for spec in arch {
        spec.validate()?;
    }
    for w in arch.windows(2) {
        if w[0].out_dim != w[1].in_dim {
            return Err(Error::domain(format!(
                "layer dimensions do not chain: {} then {}",
                w[0].out_dim, w[1].in_dim
            )));
        }
    }
    Ok(())
}

fn check_targets(out: &Array2<f64>, y: &ArrayView2<f64>) -> Result<()> {
    check_dims(out.nrows(), y.nrows())?;
    check_dims(out.ncols(), y.ncols())
}

/// Numerically stable softmax of one logit vector.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn loss_value(loss: Loss, out: &Array2<f64>, y: &ArrayView2<f64>) -> f64 {
    let n = out.nrows() as f64;
    match loss {
        Loss::SoftmaxCrossEntropy => {
            let mut total = 0.0;
            for (z, t) in out.rows().into_iter().zip(y.rows()) {
                let z = z.to_vec();
                let lse = log_sum_exp(&z);
                total -= z.iter().zip(t.iter()).map(|(zc, yc)| yc * (zc - lse)).sum::<f64>();
            }
            total / n
        }
        Loss::SquaredError => {
            let k = out.len() as f64;
            Zip::from(out).and(y).fold(0.0, |acc, &a, &b| acc + (a - b) * (a - b)) / k
        }
    }
}

fn loss_grad(loss: Loss, out: &Array2<f64>, y: &ArrayView2<f64>) -> Array2<f64> {
    let n = out.nrows() as f64;
    match loss {
        Loss::SoftmaxCrossEntropy => {
            let mut g = Array2::zeros(out.dim());
            for ((z, t), mut gr) in out.rows().into_iter().zip(y.rows()).zip(g.rows_mut()) {
                let p = softmax(&z.to_vec());
                let mass: f64 = t.sum();
                for c in 0..p.len() {
                    gr[c] = (mass * p[c] - t[c]) / n;
                }
            }
            g
        }
        Loss::SquaredError => {
            let k = out.len() as f64;
            (out - y) * (2.0 / k)
        }
    }
}

/// One-hot encoding of class labels.
pub fn one_hot(labels: &[usize], classes: usize) -> Result<Array2<f64>> {
    let mut y = Array2::zeros((labels.len(), classes));
    for (i, &c) in labels.iter().enumerate() {
        if c >= classes {
            return Err(Error::domain(format!("label {c} out of range for {classes} classes")));
        }
        y[[i, c]] = 1.0;
    }
    Ok(y)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Epoch indices (0-based) at whose start the rate is multiplied by
    /// `lr_decay_factor`.
    pub lr_decay_epochs: Vec<usize>,
    pub lr_decay_factor: f64,
    pub seed: u64,
    pub loss: Loss,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::domain("epochs and batch size must be positive"));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::domain(format!("invalid learning rate {}", self.learning_rate)));
        }
        if !(self.lr_decay_factor.is_finite() && self.lr_decay_factor > 0.0) {
            return Err(Error::domain(format!("invalid decay factor {}", self.lr_decay_factor)));
        }
        if self.lr_decay_epochs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("decay epochs must be strictly increasing"));
        }
        Ok(())
    }

    pub fn learning_rate_at(&self, epoch: usize) -> f64 {
        let k = self.lr_decay_epochs.iter().filter(|&&e| e <= epoch).count();
        self.learning_rate * self.lr_decay_factor.powi(k as i32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    /// Mean training loss of each epoch.
    pub epoch_loss: Vec<f64>,
}

struct Adam {
    m: Gradients,
    v: Gradients,
    t: i32,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl Adam {
    fn new(net: &Network) -> Self {
        let zeros = Gradients {
            weights: net.layers.iter().map(|l| Array2::zeros(l.weights.dim())).collect(),
            biases: net.layers.iter().map(|l| Array1::zeros(l.biases.len())).collect(),
        };
        Adam {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    fn step(&mut self, net: &mut Network, g: &Gradients, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.t);
        let c2 = 1.0 - ADAM_BETA2.powi(self.t);
        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
            *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
        };
        for (l, layer) in net.layers.iter_mut().enumerate() {
            Zip::from(&mut layer.weights)
                .and(&mut self.m.weights[l])
                .and(&mut self.v.weights[l])
                .and(&g.weights[l])
                .for_each(|p, m, v, &g| update(p, m, v, g));
            Zip::from(&mut layer.biases)
                .and(&mut self.m.biases[l])
                .and(&mut self.v.biases[l])
                .and(&g.biases[l])
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }
    }
}

/// Adam with step decay. Batches are drawn from a per-epoch shuffle; the
/// final partial batch is kept.
pub fn train(net: &mut Network, x: ArrayView2<f64>, y: ArrayView2<f64>, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if x.nrows() == 0 {
        return Err(Error::domain("training data is empty"));
    }
    check_dims(x.nrows(), y.nrows())?;
    check_dims(net.in_dim(), x.ncols())?;
    check_dims(net.out_dim(), y.ncols())?;
    let n = x.nrows();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dropout_seed = cfg.seed.wrapping_add(DROPOUT_SEED_OFFSET);
    let mut adam = Adam::new(net);
    let mut order: Vec<usize> = (0..n).collect();
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    let mut step = 0u64;
    for epoch in 0..cfg.epochs {
        let lr = cfg.learning_rate_at(epoch);
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for idx in order.chunks(cfg.batch_size) {
            let xb = x.select(Axis(0), idx);
            let yb = y.select(Axis(0), idx);
            let mode = Mode::Train { dropout_seed, step };
            let (l, g) = net.loss_and_grad(xb.view(), yb.view(), cfg.loss, mode)?;
            if !l.is_finite() {
                return Err(Error::Training { epoch, loss: l });
            }
            adam.step(net, &g, lr);
            total += l * idx.len() as f64;
            step += 1;
        }
        let mean = total / n as f64;
        log::debug!("epoch {epoch}: loss {mean:.6e}");
        epoch_loss.push(mean);
    }
    Ok(TrainReport { epoch_loss })
}

/// MC-dropout predictive summary for one input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McPredictive {
    pub mean: Vec<f64>,
    /// Population standard deviation over samples.
    pub std: Vec<f64>,
    /// S × out_dim, when retained.
    pub samples: Option<Array2<f64>>,
}

/// MC-dropout predictive summary for a batch of inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct McBatch {
    /// n × out_dim
    pub mean: Array2<f64>,
    pub std: Array2<f64>,
    /// Class probabilities under the requested reduction.
    pub probs: Option<Array2<f64>>,
    /// S × n × out_dim, when retained.
    pub samples: Option<Array3<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct McOptions {
    pub retain_samples: bool,
    pub reduction: Option<Reduction>,
}

pub fn mc_sample_seeds(seed: u64, s: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..s).map(|_| rng.next_u64()).collect()
}

struct ChunkStats {
    sum: Array2<f64>,
    m2: Array2<f64>,
    mean_run: Array2<f64>,
    prob_sum: Option<Array2<f64>>,
    samples: Option<Array3<f64>>,
}

/// S stochastic passes over every row of `x`. Sample s is bit-identical to
/// `forward_batch(x, Mode::McSample { sample_seed: mc_sample_seeds(seed, S)[s] })`.
/// Rows are processed in fixed chunks, so results do not depend on thread
/// scheduling.
pub fn mc_predict_batch(net: &Network, x: ArrayView2<f64>, s: usize, seed: u64, opts: McOptions) -> Result<McBatch> {
    if s == 0 {
        return Err(Error::domain("number of MC samples must be at least 1"));
    }
    check_dims(net.in_dim(), x.ncols())?;
    let seeds = mc_sample_seeds(seed, s);
    let masks: Vec<Vec<Option<Array1<f64>>>> = seeds.iter().map(|&sd| net.shared_masks(sd)).collect();
    let l0 = net.first_dropout_layer();
    let out_dim = net.out_dim();
    let n = x.nrows();
    let starts: Vec<usize> = (0..n).step_by(MC_CHUNK_ROWS).collect();
    let chunks: Vec<ChunkStats> = starts
        .par_iter()
        .map(|&start| {
            let end = (start + MC_CHUNK_ROWS).min(n);
            let xc = x.slice(s![start..end, ..]);
            let rows = end - start;
            let prefix = l0.map(|l| net.prefix(xc, l));
            let fixed = if l0.is_none() {
                Some(net.forward_from(0, xc, None, None))
            } else {
                None
            };
            let mut st = ChunkStats {
                sum: Array2::zeros((rows, out_dim)),
                m2: Array2::zeros((rows, out_dim)),
                mean_run: Array2::zeros((rows, out_dim)),
                prob_sum: (opts.reduction == Some(Reduction::MeanOfSoftmax)).then(|| Array2::zeros((rows, out_dim))),
                samples: opts.retain_samples.then(|| Array3::zeros((s, rows, out_dim))),
            };
            for (k, mk) in masks.iter().enumerate() {
                let owned;
                let out = match (l0, &fixed) {
                    (_, Some(f)) => f,
                    (Some(l), None) => {
                        owned = net.forward_from(
                            l + 1,
                            prefix.as_ref().expect("prefix").view(),
                            mk[l].as_ref(),
                            Some(mk),
                        );
                        &owned
                    }
                    (None, None) => unreachable!(),
                };
                let kf = (k + 1) as f64;
                Zip::from(&mut st.sum)
                    .and(&mut st.m2)
                    .and(&mut st.mean_run)
                    .and(out)
                    .for_each(|sum, m2, mr, &v| {
                        *sum += v;
                        let d = v - *mr;
                        *mr += d / kf;
                        *m2 += d * (v - *mr);
                    });
                if let Some(ps) = &mut st.prob_sum {
                    for (r, mut pr) in out.rows().into_iter().zip(ps.rows_mut()) {
                        let p = softmax(&r.to_vec());
                        pr.iter_mut().zip(p).for_each(|(a, b)| *a += b);
                    }
                }
                if let Some(sm) = &mut st.samples {
                    sm.slice_mut(s![k, .., ..]).assign(out);
                }
            }
            st
        })
        .collect();

    let sf = s as f64;
    let mut mean = Array2::zeros((n, out_dim));
    let mut std = Array2::zeros((n, out_dim));
    let mut probs = opts.reduction.map(|_| Array2::zeros((n, out_dim)));
    let mut samples = opts.retain_samples.then(|| Array3::zeros((s, n, out_dim)));
    for (start, st) in starts.iter().zip(chunks) {
        let end = (start + MC_CHUNK_ROWS).min(n);
        let m = &st.sum / sf;
        mean.slice_mut(s![*start..end, ..]).assign(&m);
        std.slice_mut(s![*start..end, ..]).assign(&st.m2.mapv(|v| (v / sf).max(0.0).sqrt()));
        if let Some(p) = &mut probs {
            let block = match (opts.reduction, st.prob_sum) {
                (Some(Reduction::MeanOfSoftmax), Some(ps)) => ps / sf,
                _ => {
                    let mut b = Array2::zeros(m.dim());
                    for (r, mut br) in m.rows().into_iter().zip(b.rows_mut()) {
                        br.assign(&Array1::from(softmax(&r.to_vec())));
                    }
                    b
                }
            };
            p.slice_mut(s![*start..end, ..]).assign(&block);
        }
        if let (Some(all), Some(part)) = (&mut samples, st.samples) {
            all.slice_mut(s![.., *start..end, ..]).assign(&part);
        }
    }
    Ok(McBatch {
        mean,
        std,
        probs,
        samples,
    })
}

pub fn mc_predict(net: &Network, x: &[f64], s: usize, seed: u64, retain_samples: bool) -> Result<McPredictive> {
    let xv = ArrayView2::from_shape((1, x.len()), x).map_err(|_| Error::domain("bad input"))?;
    let b = mc_predict_batch(
        net,
        xv,
        s,
        seed,
        McOptions {
            retain_samples,
            reduction: None,
        },
    )?;
    Ok(McPredictive {
        mean: b.mean.row(0).to_vec(),
        std: b.std.row(0).to_vec(),
        samples: b.samples.map(|a| a.index_axis(Axis(1), 0).to_owned()),
    })
}

/// Class probabilities from retained MC samples.
pub fn softmax_probs(mc: &McPredictive, reduction: Reduction) -> Result<Vec<f64>> {
    let samples = mc
        .samples
        .as_ref()
        .ok_or_else(|| Error::Usage("MC samples were not retained".into()))?;
    let sf = samples.nrows() as f64;
    Ok(match reduction {
        Reduction::MeanOfSoftmax => {
            let mut acc = vec![0.0; samples.ncols()];
            for r in samples.rows() {
                for (a, p) in acc.iter_mut().zip(softmax(&r.to_vec())) {
                    *a += p;
                }
            }
            acc.into_iter().map(|a| a / sf).collect()
        }
        Reduction::SoftmaxOfMean => {
            let mean: Vec<f64> = samples.mean_axis(Axis(0)).expect("non-empty").to_vec();
            softmax(&mean)
        }
    })
}

#[derive(Serialize, Deserialize)]
struct LayerRecord {
    spec: LayerSpec,
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    layers: Vec<LayerRecord>,
}

impl From<&Network> for Checkpoint {
    fn from(net: &Network) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            layers: net
                .layers
                .iter()
                .map(|l| LayerRecord {
                    spec: l.spec,
                    weights: l.weights.rows().into_iter().map(|r| r.to_vec()).collect(),
                    biases: l.biases.to_vec(),
                })
                .collect(),
        }
    }
}

impl Checkpoint {
    fn into_network(self) -> Result<Network> {
        if self.format != CHECKPOINT_FORMAT || self.version != CHECKPOINT_VERSION {
            return Err(Error::domain(format!(
                "unsupported checkpoint {} v{}",
                self.format, self.version
            )));
        }
        let arch: Vec<LayerSpec> = self.layers.iter().map(|l| l.spec).collect();
        let mut ws = Vec::new();
        let mut bs = Vec::new();
        for l in self.layers {
            let rows = l.weights.len();
            let flat: Vec<f64> = l.weights.into_iter().flatten().collect();
            let cols = if rows == 0 { 0 } else { flat.len() / rows };
            if rows * cols != flat.len() {
                return Err(Error::domain("ragged weight matrix in checkpoint"));
            }
            ws.push(Array2::from_shape_vec((rows, cols), flat).map_err(|e| Error::domain(e.to_string()))?);
            bs.push(Array1::from(l.biases));
        }
        Network::from_parameters(&arch, ws, bs)
    }
}
