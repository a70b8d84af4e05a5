//! Mercer eigenbasis of the RBF kernel κ(x, x') = exp(−α²(x − x')²) under
//! the input density w(x) = β/√π · exp(−β²x²).
//!
//! With s = √(1 + (2α/β)²):
//!
//! γ_j = β α^{2j} (β²(1 + s)/2 + α²)^{−(j+½)}
//! φ_j(x) = s^{1/4} / √(2^j j!) · exp(−(s − 1)β²x²/2) · H_j(√s β x)

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::gauss_hermite;

pub const MAX_EIGENVALUE_INDEX: usize = 200;
pub const MAX_EIGENFUNCTION_INDEX: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenParams {
    alpha: f64,
    beta: f64,
}

impl EigenParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
            return Err(Error::domain(format!(
                "alpha and beta must be positive, got ({alpha}, {beta})"
            )));
        }
        Ok(EigenParams { alpha, beta })
    }

    /// α from the RBF length-scale, α² = 1/(2ℓ²).
    pub fn from_length_scale(ell: f64, beta: f64) -> Result<Self> {
        if !(ell.is_finite() && ell > 0.0) {
            return Err(Error::domain(format!("length-scale must be positive, got {ell}")));
        }
        EigenParams::new(1.0 / (2f64.sqrt() * ell), beta)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    fn s(&self) -> f64 {
        let r = 2.0 * self.alpha / self.beta;
        (1.0 + r * r).sqrt()
    }

    /// ln of the common ratio γ_{j+1}/γ_j.
    fn ln_ratio(&self) -> f64 {
        2.0 * self.alpha.ln() - self.denominator().ln()
    }

    fn denominator(&self) -> f64 {
        0.5 * self.beta * self.beta * (1.0 + self.s()) + self.alpha * self.alpha
    }

    /// The RBF kernel these eigenpairs expand.
    pub fn kernel(&self, x: f64, x2: f64) -> f64 {
        let d = x - x2;
        (-self.alpha * self.alpha * d * d).exp()
    }

    /// The input density w(x).
    pub fn density(&self, x: f64) -> f64 {
        self.beta / PI.sqrt() * (-self.beta * self.beta * x * x).exp()
    }
}

pub fn eigenvalue(p: &EigenParams, j: usize) -> Result<f64> {
    if j > MAX_EIGENVALUE_INDEX {
        return Err(Error::domain(format!(
            "eigenvalue index {j} exceeds {MAX_EIGENVALUE_INDEX}"
        )));
    }
    let ln = p.beta.ln() + j as f64 * p.ln_ratio() - 0.5 * p.denominator().ln();
    Ok(ln.exp())
}

/// φ_0(x), …, φ_{j_max}(x), using the normalized Hermite recurrence
/// h_{j+1} = t√(2/(j+1)) h_j − √(j/(j+1)) h_{j−1}, h_j = H_j/√(2^j j!).
pub fn eigenfunctions_upto(p: &EigenParams, j_max: usize, x: f64) -> Result<Vec<f64>> {
    if j_max > MAX_EIGENFUNCTION_INDEX {
        return Err(Error::domain(format!(
            "eigenfunction index {j_max} exceeds {MAX_EIGENFUNCTION_INDEX}"
        )));
    }
    let s = p.s();
    let b2x2 = p.beta * p.beta * x * x;
    let pref = s.powf(0.25) * (-(s - 1.0) * b2x2 / 2.0).exp();
    let t = s.sqrt() * p.beta * x;
    let mut out = Vec::with_capacity(j_max + 1);
    let (mut prev, mut cur) = (0.0, 1.0);
    out.push(pref * cur);
    for j in 0..j_max {
        let jf = j as f64;
        let next = t * (2.0 / (jf + 1.0)).sqrt() * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        out.push(pref * cur);
    }
    Ok(out)
}

pub fn eigenfunction(p: &EigenParams, j: usize, x: f64) -> Result<f64> {
    Ok(eigenfunctions_upto(p, j, x)?[j])
}

/// ∫ φ_i φ_j w dx by Gauss–Hermite quadrature after the substitution
/// u = √s β x, which turns the integrand into a polynomial times e^{−u²}.
pub fn orthonormality_check(p: &EigenParams, i: usize, j: usize, quad_order: usize) -> Result<f64> {
    let m = i.max(j);
    if quad_order < 2 * m + 8 {
        return Err(Error::domain(format!(
            "quadrature order {quad_order} is below 2*max(i,j)+8 = {}",
            2 * m + 8
        )));
    }
    let rule = gauss_hermite(quad_order)?;
    let c = p.s().sqrt() * p.beta;
    let sum = rule
        .nodes()
        .iter()
        .zip(rule.weights())
        .map(|(&u, &wk)| {
            let x = u / c;
            let phi = eigenfunctions_upto(p, m, x).expect("index checked");
            // w(x)/e^{−u²} combined in one exponent to avoid overflow.
            let dens = p.beta / PI.sqrt() * ((u * u) - p.beta * p.beta * x * x).exp();
            wk * phi[i] * phi[j] * dens
        })
        .sum::<f64>();
    Ok(sum / c)
}

/// Σ_{j<J} γ_j φ_j(x) φ_j(x2).
pub fn mercer_reconstruct(p: &EigenParams, terms: usize, x: f64, x2: f64) -> Result<f64> {
    if terms == 0 || terms > MAX_EIGENFUNCTION_INDEX + 1 {
        return Err(Error::domain(format!(
            "number of terms must be in 1..={}, got {terms}",
            MAX_EIGENFUNCTION_INDEX + 1
        )));
    }
    let a = eigenfunctions_upto(p, terms - 1, x)?;
    let b = eigenfunctions_upto(p, terms - 1, x2)?;
    let mut sum = 0.0;
    for j in 0..terms {
        sum += eigenvalue(p, j)? * (a[j] * b[j]);
    }
    Ok(sum)
}
