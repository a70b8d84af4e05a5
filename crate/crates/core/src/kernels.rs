//! Exact covariance functions: stationary Matérn and RBF, the locally
//! stationary Matérn-NN composite, the Matérn spectral density and the
//! modulus of its stable spectral factor.

use std::f64::consts::{LN_2, PI};

use ndarray::{Array2, ArrayView2, Axis};
use ndarray::parallel::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::specfun::{ln_bessel_k_unchecked, ln_gamma};

/// Default diagonal jitter for Gram matrices handed to a Cholesky factorization.
pub const DEFAULT_JITTER: f64 = 1e-8;

/// Matérn smoothness ν and length-scale ℓ, with the derived rate
/// λ = √(2ν)/ℓ and the white-noise spectral constant q² cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMaternParams", into = "RawMaternParams")]
pub struct MaternParams {
    nu: f64,
    ell: f64,
    lambda: f64,
    ln_q_sq: f64,
}

#[derive(Serialize, Deserialize)]
struct RawMaternParams {
    nu: f64,
    ell: f64,
}

impl TryFrom<RawMaternParams> for MaternParams {
    type Error = Error;

    fn try_from(raw: RawMaternParams) -> Result<Self> {
        MaternParams::new(raw.nu, raw.ell)
    }
}

impl From<MaternParams> for RawMaternParams {
    fn from(p: MaternParams) -> Self {
        RawMaternParams { nu: p.nu, ell: p.ell }
    }
}

impl MaternParams {
    pub fn new(nu: f64, ell: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::domain(format!("Matérn smoothness must be > 0, got {nu}")));
        }
        if !(ell.is_finite() && ell > 0.0) {
            return Err(Error::domain(format!("Matérn length-scale must be > 0, got {ell}")));
        }
        let lambda = (2.0 * nu).sqrt() / ell;
        // q² = 2 √π λ^{2ν} Γ(ν+½) / Γ(ν)
        let ln_q_sq = LN_2 + 0.5 * PI.ln() + 2.0 * nu * lambda.ln() + ln_gamma(nu + 0.5)
            - ln_gamma(nu);
        Ok(MaternParams {
            nu,
            ell,
            lambda,
            ln_q_sq,
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// λ = √(2ν)/ℓ
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// ln q², kept in log space because λ^{2ν} overflows for large ν.
    pub fn ln_q_sq(&self) -> f64 {
        self.ln_q_sq
    }

    pub fn q(&self) -> f64 {
        (0.5 * self.ln_q_sq).exp()
    }

    /// Stationary Matérn covariance as a function of distance r ≥ 0.
    pub fn covariance(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 1.0;
        }
        let nu = self.nu;
        let z = self.lambda * r;
        let ln_k = (1.0 - nu) * LN_2 - ln_gamma(nu) + nu * z.ln() + ln_bessel_k_unchecked(nu, z);
        ln_k.exp()
    }
}

/// Bias-prior variance σ_b² and the derived envelope variance σ_m² = 2σ_b² + ℓ².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    sigma_b_sq: f64,
    sigma_m_sq: f64,
}

impl EnvelopeParams {
    pub fn new(sigma_b_sq: f64, ell: f64) -> Result<Self> {
        if !(sigma_b_sq.is_finite() && sigma_b_sq > 0.0) {
            return Err(Error::domain(format!("sigma_b^2 must be > 0, got {sigma_b_sq}")));
        }
        if !(ell.is_finite() && ell > 0.0) {
            return Err(Error::domain(format!("length-scale must be > 0, got {ell}")));
        }
        Ok(EnvelopeParams {
            sigma_b_sq,
            sigma_m_sq: 2.0 * sigma_b_sq + ell * ell,
        })
    }

    pub fn sigma_b_sq(&self) -> f64 {
        self.sigma_b_sq
    }

    pub fn sigma_m_sq(&self) -> f64 {
        self.sigma_m_sq
    }

    /// exp(−xᵀx / 2σ_m²)
    pub fn envelope(&self, x: &[f64]) -> f64 {
        (-dot(x, x) / (2.0 * self.sigma_m_sq)).exp()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

pub fn matern_kernel(p: &MaternParams, x: &[f64], x2: &[f64]) -> Result<f64> {
    check_dims(x.len(), x2.len())?;
    Ok(p.covariance(distance(x, x2)))
}

/// exp(−‖x−x2‖² / 2ℓ²)
pub fn rbf_kernel(ell: f64, x: &[f64], x2: &[f64]) -> Result<f64> {
    check_dims(x.len(), x2.len())?;
    if !(ell > 0.0) {
        return Err(Error::domain(format!("RBF length-scale must be > 0, got {ell}")));
    }
    let r = distance(x, x2);
    Ok((-r * r / (2.0 * ell * ell)).exp())
}

/// Locally stationary composite kernel: a Matérn kernel modulated by a
/// Gaussian decay envelope on each argument.
pub fn matnn_kernel(
    p: &MaternParams,
    e: &EnvelopeParams,
    scale: f64,
    x: &[f64],
    x2: &[f64],
) -> Result<f64> {
    check_dims(x.len(), x2.len())?;
    Ok(scale * e.envelope(x) * p.covariance(distance(x, x2)) * e.envelope(x2))
}

/// One-dimensional Matérn spectral density S(ω) = q² (λ² + ω²)^{−(ν+½)}.
pub fn matern_spectral_density(p: &MaternParams, omega: f64) -> f64 {
    let l2 = p.lambda * p.lambda;
    (p.ln_q_sq - (p.nu + 0.5) * (l2 + omega * omega).ln()).exp()
}

/// |G(iω)|² = (λ² + ω²)^{−(ν+½)} for the stable factor G(iω) = (λ + iω)^{−(ν+½)}.
pub fn transfer_modulus_sq(p: &MaternParams, omega: f64) -> f64 {
    let l2 = p.lambda * p.lambda;
    (l2 + omega * omega).powf(-(p.nu + 0.5))
}

/// Trapezoid-rule Fourier transform of the Matérn covariance on
/// [−r_max, r_max] with `n_steps` intervals, evaluated at each ω.
pub fn kernel_to_spectral_numeric(
    p: &MaternParams,
    omega_grid: &[f64],
    r_max: f64,
    n_steps: usize,
) -> Result<Vec<f64>> {
    if n_steps == 0 {
        return Err(Error::domain("n_steps must be positive"));
    }
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(Error::domain(format!("r_max must be > 0, got {r_max}")));
    }
    let tail = p.covariance(r_max);
    if tail >= 1e-10 {
        log::warn!(
            "kernel value {tail:e} at r_max = {r_max} is not negligible; truncation error expected"
        );
    }
    let h = 2.0 * r_max / n_steps as f64;
    let samples: Vec<(f64, f64)> = (0..=n_steps)
        .map(|i| {
            let r = -r_max + i as f64 * h;
            let w = if i == 0 || i == n_steps { 0.5 } else { 1.0 };
            (r, w * p.covariance(r.abs()))
        })
        .collect();
    Ok(omega_grid
        .iter()
        .map(|&omega| h * samples.iter().map(|&(r, k)| k * (omega * r).cos()).sum::<f64>())
        .collect())
}

/// A covariance function over real vectors. Callers guarantee both
/// arguments have the same length.
pub trait Kernel: Send + Sync {
    fn eval(&self, x: &[f64], x2: &[f64]) -> f64;
}

impl<F> Kernel for F
where
    F: Fn(&[f64], &[f64]) -> f64 + Send + Sync,
{
    fn eval(&self, x: &[f64], x2: &[f64]) -> f64 {
        self(x, x2)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MaternKernel(pub MaternParams);

impl Kernel for MaternKernel {
    fn eval(&self, x: &[f64], x2: &[f64]) -> f64 {
        self.0.covariance(distance(x, x2))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RbfKernel {
    pub ell: f64,
}

impl Kernel for RbfKernel {
    fn eval(&self, x: &[f64], x2: &[f64]) -> f64 {
        let r = distance(x, x2);
        (-r * r / (2.0 * self.ell * self.ell)).exp()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MatNnKernel {
    pub matern: MaternParams,
    pub envelope: EnvelopeParams,
    pub scale: f64,
}

impl Kernel for MatNnKernel {
    fn eval(&self, x: &[f64], x2: &[f64]) -> f64 {
        self.scale
            * self.envelope.envelope(x)
            * self.matern.covariance(distance(x, x2))
            * self.envelope.envelope(x2)
    }
}

fn row(x: &ArrayView2<f64>, i: usize) -> Vec<f64> {
    x.row(i).to_vec()
}

/// Gram matrix of `k` over the rows of `x`, with `jitter` added on the diagonal.
///
/// Rows are filled in parallel; entry (i, j) is always evaluated as
/// k(x_min(i,j), x_max(i,j)) so the result is exactly symmetric and identical
/// to a sequential fill.
pub fn gram_matrix<K: Kernel + ?Sized>(k: &K, x: ArrayView2<f64>, jitter: f64) -> Array2<f64> {
    let n = x.nrows();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| row(&x, i)).collect();
    let mut out = Array2::<f64>::zeros((n, n));
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut out_row)| {
            for j in 0..n {
                let (a, b) = if i <= j { (i, j) } else { (j, i) };
                out_row[j] = k.eval(&rows[a], &rows[b]);
            }
            out_row[i] += jitter;
        });
    out
}

/// Cross-covariance matrix with entry (i, j) = k(a_i, b_j).
pub fn cross_matrix<K: Kernel + ?Sized>(
    k: &K,
    a: ArrayView2<f64>,
    b: ArrayView2<f64>,
) -> Result<Array2<f64>> {
    check_dims(a.ncols(), b.ncols())?;
    let b_rows: Vec<Vec<f64>> = (0..b.nrows()).map(|j| row(&b, j)).collect();
    let mut out = Array2::<f64>::zeros((a.nrows(), b.nrows()));
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut out_row)| {
            let ai = a.row(i).to_vec();
            for (j, bj) in b_rows.iter().enumerate() {
                out_row[j] = k.eval(&ai, bj);
            }
        });
    Ok(out)
}
