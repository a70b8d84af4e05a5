//! Exact Gaussian-process regression with a Gaussian likelihood.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

use crate::error::{check_dims, Error, Result};
use crate::kernels::Kernel;

/// Largest training set accepted by [`GpRegressor::fit`].
pub const MAX_TRAINING_POINTS: usize = 10_000;

const JITTER_LADDER: [f64; 5] = [1e-10, 1e-9, 1e-8, 1e-7, 1e-6];

pub struct GpRegressor<K: Kernel> {
    kernel: K,
    noise_var: f64,
    /// Extra diagonal actually used, including any escalation.
    jitter: f64,
    x: Array2<f64>,
    /// Lower Cholesky factor of K + (noise_var + jitter) I.
    chol: Array2<f64>,
    alpha: Array1<f64>,
}

/// In-place lower Cholesky factor; `None` if a pivot is not positive.
pub fn cholesky(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > 0.0 && d.is_finite()) {
            return None;
        }
        let djj = d.sqrt();
        l[[j, j]] = djj;
        for i in (j + 1)..n {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / djj;
        }
    }
    Some(l)
}

/// Solves L z = b for lower-triangular L.
pub fn solve_lower(l: &Array2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut z = Array1::zeros(n);
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[[i, k]] * z[k];
        }
        z[i] = s / l[[i, i]];
    }
    z
}

/// Solves Lᵀ z = b for lower-triangular L.
pub fn solve_upper_t(l: &Array2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut z = Array1::zeros(n);
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[[k, i]] * z[k];
        }
        z[i] = s / l[[i, i]];
    }
    z
}

impl<K: Kernel> GpRegressor<K> {
    /// Factorizes K + (noise_var + jitter) I. If that fails, extra jitter is
    /// tried from 1e-10 up to 1e-6 by decades.
    pub fn fit(kernel: K, x: ArrayView2<f64>, y: ArrayView1<f64>, noise_var: f64, jitter: f64) -> Result<Self> {
        let n = x.nrows();
        if n == 0 {
            return Err(Error::domain("GP needs at least one training point"));
        }
        if n > MAX_TRAINING_POINTS {
            return Err(Error::domain(format!(
                "exact GP limited to {MAX_TRAINING_POINTS} points, got {n}"
            )));
        }
        check_dims(n, y.len())?;
        if !(noise_var >= 0.0 && jitter >= 0.0) {
            return Err(Error::domain("noise variance and jitter must be non-negative"));
        }
        let k = crate::kernels::gram_matrix(&kernel, x, 0.0);
        let attempt = |extra: f64| {
            let mut a = k.clone();
            for i in 0..n {
                a[[i, i]] += noise_var + extra;
            }
            cholesky(&a)
        };
        let mut used = jitter;
        let mut chol = attempt(jitter);
        if chol.is_none() {
            for &extra in &JITTER_LADDER {
                if extra <= jitter {
                    continue;
                }
                log::warn!("Cholesky failed, retrying with jitter {extra:e}");
                chol = attempt(extra);
                if chol.is_some() {
                    used = extra;
                    break;
                }
            }
        }
        let chol = chol.ok_or_else(|| {
            Error::Numerical("kernel matrix is not positive definite even with jitter 1e-6".into())
        })?;
        let z = solve_lower(&chol, y);
        let alpha = solve_upper_t(&chol, z.view());
        if !alpha.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical("non-finite GP weights".into()));
        }
        Ok(GpRegressor {
            kernel,
            noise_var,
            jitter: used,
            x: x.to_owned(),
            chol,
            alpha,
        })
    }

    pub fn alpha(&self) -> &Array1<f64> {
        &self.alpha
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Latent predictive mean and variance (variance clamped at 0).
    pub fn predict(&self, x_star: &[f64]) -> Result<(f64, f64)> {
        check_dims(self.x.ncols(), x_star.len())?;
        let ks: Array1<f64> = self
            .x
            .rows()
            .into_iter()
            .map(|r| self.kernel.eval(&r.to_vec(), x_star))
            .collect();
        let mean = ks.dot(&self.alpha);
        let v = solve_lower(&self.chol, ks.view());
        let var = self.kernel.eval(x_star, x_star) - v.dot(&v);
        Ok((mean, var.max(0.0)))
    }

    pub fn predict_batch(&self, x_star: ArrayView2<f64>) -> Result<Vec<(f64, f64)>> {
        let rows: Vec<Vec<f64>> = x_star.rows().into_iter().map(|r| r.to_vec()).collect();
        rows.par_iter().map(|r| self.predict(r)).collect()
    }
}
