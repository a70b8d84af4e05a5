//! Monte Carlo estimate of the kernel of a single-hidden-layer network,
//!
//! κ̂(x, x') = (1/K) Σ_k σ(w_kᵀx + b_k) σ(w_kᵀx' + b_k),
//!
//! with w_k and b_k drawn from their priors.
//!
//! Sampling uses ChaCha8 seeded with `seed_from_u64(seed)`. Stream 0 holds the
//! features of a configuration (weights in row-major order, then biases);
//! stream 1 is reserved for the large calibration sample so it never shares
//! draws with the curve it calibrates.

use ndarray::{Array1, Array2, ArrayView2};
use ndarray::parallel::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::activations::ActivationKind;
use crate::error::{check_dims, Error, Result};

/// Sample size used to fix the scale of the exact kernel.
pub const CALIBRATION_K: usize = 100_000;

const FEATURE_STREAM: u64 = 0;
const CALIBRATION_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightPrior {
    /// Uniform on {−1, +1}.
    BinaryWhite,
    Gaussian { variance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasPrior {
    pub sigma_b_sq: f64,
}

impl BiasPrior {
    pub fn new(sigma_b_sq: f64) -> Result<Self> {
        if !(sigma_b_sq.is_finite() && sigma_b_sq > 0.0) {
            return Err(Error::domain(format!(
                "bias variance must be positive, got {sigma_b_sq}"
            )));
        }
        Ok(BiasPrior { sigma_b_sq })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomFeatureConfig {
    pub weight_prior: WeightPrior,
    pub bias_prior: BiasPrior,
    pub k: usize,
    pub seed: u64,
}

impl RandomFeatureConfig {
    pub fn new(weight_prior: WeightPrior, bias_prior: BiasPrior, k: usize, seed: u64) -> Result<Self> {
        let cfg = RandomFeatureConfig {
            weight_prior,
            bias_prior,
            k,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::domain("number of features K must be at least 1"));
        }
        if let WeightPrior::Gaussian { variance } = self.weight_prior {
            if !(variance.is_finite() && variance > 0.0) {
                return Err(Error::domain(format!(
                    "Gaussian weight variance must be positive, got {variance}"
                )));
            }
        }
        BiasPrior::new(self.bias_prior.sigma_b_sq).map(|_| ())
    }
}

/// One draw of K hidden units.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    /// K × d
    pub weights: Array2<f64>,
    pub biases: Array1<f64>,
}

/// Kernel estimate with the standard error of the mean over the K products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelEstimate {
    pub value: f64,
    pub std_err: f64,
}

fn sample_on_stream(cfg: &RandomFeatureConfig, d: usize, stream: u64) -> Result<Features> {
    cfg.validate()?;
    if d == 0 {
        return Err(Error::domain("input dimension must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let k = cfg.k;
    let weights = match cfg.weight_prior {
        WeightPrior::BinaryWhite => Array2::from_shape_simple_fn((k, d), || {
            if rng.random::<bool>() {
                1.0
            } else {
                -1.0
            }
        }),
        WeightPrior::Gaussian { variance } => {
            let n = Normal::new(0.0, variance.sqrt()).expect("validated variance");
            Array2::from_shape_simple_fn((k, d), || n.sample(&mut rng))
        }
    };
    let nb = Normal::new(0.0, cfg.bias_prior.sigma_b_sq.sqrt()).expect("validated variance");
    let biases = Array1::from_shape_simple_fn(k, || nb.sample(&mut rng));
    Ok(Features { weights, biases })
}

pub fn sample_features(cfg: &RandomFeatureConfig, d: usize) -> Result<Features> {
    sample_on_stream(cfg, d, FEATURE_STREAM)
}

impl Features {
    pub fn k(&self) -> usize {
        self.biases.len()
    }

    pub fn dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Hidden-unit outputs σ(w_kᵀx + b_k) for all k.
    pub fn hidden(&self, act: &ActivationKind, x: &[f64]) -> Result<Vec<f64>> {
        check_dims(self.dim(), x.len())?;
        Ok(self
            .weights
            .rows()
            .into_iter()
            .zip(self.biases.iter())
            .map(|(w, &b)| {
                let z = w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b;
                act.apply(z)
            })
            .collect())
    }

    pub fn estimate(&self, act: &ActivationKind, x: &[f64], x2: &[f64]) -> Result<KernelEstimate> {
        let h1 = self.hidden(act, x)?;
        let h2 = self.hidden(act, x2)?;
        Ok(mean_and_stderr(&h1, &h2))
    }

    /// Estimates against a fixed reference for every grid point, reusing this
    /// feature draw.
    pub fn curve(
        &self,
        act: &ActivationKind,
        x_ref: &[f64],
        grid: ArrayView2<f64>,
    ) -> Result<Vec<KernelEstimate>> {
        let h_ref = self.hidden(act, x_ref)?;
        check_dims(self.dim(), grid.ncols())?;
        let out: Vec<Result<KernelEstimate>> = grid
            .axis_iter(ndarray::Axis(0))
            .into_par_iter()
            .map(|g| {
                let h = self.hidden(act, &g.to_vec())?;
                Ok(mean_and_stderr(&h_ref, &h))
            })
            .collect();
        out.into_iter().collect()
    }

    /// Gram matrix of the finite-width kernel over the rows of `x`.
    pub fn gram(&self, act: &ActivationKind, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        check_dims(self.dim(), x.ncols())?;
        let n = x.nrows();
        let hidden: Vec<Vec<f64>> = x
            .rows()
            .into_iter()
            .map(|r| self.hidden(act, &r.to_vec()))
            .collect::<Result<_>>()?;
        let kf = self.k() as f64;
        Ok(Array2::from_shape_fn((n, n), |(i, j)| {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            dot(&hidden[a], &hidden[b]) / kf
        }))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mean_and_stderr(h1: &[f64], h2: &[f64]) -> KernelEstimate {
    let k = h1.len() as f64;
    let mean = dot(h1, h2) / k;
    if h1.len() < 2 {
        return KernelEstimate {
            value: mean,
            std_err: f64::NAN,
        };
    }
    let ss: f64 = h1
        .iter()
        .zip(h2)
        .map(|(a, b)| {
            let e = a * b - mean;
            e * e
        })
        .sum();
    KernelEstimate {
        value: mean,
        std_err: (ss / (k - 1.0) / k).sqrt(),
    }
}

/// Draws features from `cfg` and returns the estimate at (x, x2).
pub fn estimate_kernel(
    cfg: &RandomFeatureConfig,
    act: &ActivationKind,
    x: &[f64],
    x2: &[f64],
) -> Result<f64> {
    check_dims(x.len(), x2.len())?;
    let f = sample_features(cfg, x.len())?;
    Ok(f.estimate(act, x, x2)?.value)
}

/// Estimates against `x_ref` over the rows of `grid` with one shared feature draw.
pub fn kernel_curve(
    cfg: &RandomFeatureConfig,
    act: &ActivationKind,
    x_ref: &[f64],
    grid: ArrayView2<f64>,
) -> Result<Vec<f64>> {
    Ok(kernel_curve_with_stderr(cfg, act, x_ref, grid)?
        .into_iter()
        .map(|e| e.value)
        .collect())
}

pub fn kernel_curve_with_stderr(
    cfg: &RandomFeatureConfig,
    act: &ActivationKind,
    x_ref: &[f64],
    grid: ArrayView2<f64>,
) -> Result<Vec<KernelEstimate>> {
    check_dims(x_ref.len(), grid.ncols())?;
    let f = sample_features(cfg, x_ref.len())?;
    f.curve(act, x_ref, grid)
}

/// Scale that makes an exact kernel with unit value at the origin agree with
/// the MC estimate at x = x' = 0, using `CALIBRATION_K` features drawn from a
/// separate stream.
pub fn calibrate_scale(cfg: &RandomFeatureConfig, act: &ActivationKind, d: usize) -> Result<f64> {
    let big = RandomFeatureConfig {
        k: CALIBRATION_K,
        ..*cfg
    };
    let f = sample_on_stream(&big, d, CALIBRATION_STREAM)?;
    let zero = vec![0.0; d];
    let scale = f.estimate(act, &zero, &zero)?.value;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Numerical(format!(
            "calibration estimate at the origin is {scale}"
        )));
    }
    Ok(scale)
}
