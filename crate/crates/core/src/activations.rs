//! Activation functions.
//!
//! The Matérn activation is the causal impulse response whose Laplace
//! transform is the stable spectral factor (λ + s)^{−(ν+½)}, scaled by the
//! white-noise constant q:
//!
//! σ(x) = q / Γ(ν+½) · Θ(x) · x^{ν−½} · e^{−λx},  with Θ(0) = 1.
//!
//! Comparison activations (RBF, ReLU, step, erf, identity) share the same
//! interface so networks and kernel estimators can swap them freely.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::MaternParams;
use crate::specfun::{erf, ln_gamma};

/// The Matérn activation with its scale constant q/Γ(ν+½) precomputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MaternParams", into = "MaternParams")]
pub struct MaternActivation {
    params: MaternParams,
    ln_coef: f64,
}

impl TryFrom<MaternParams> for MaternActivation {
    type Error = Error;

    fn try_from(p: MaternParams) -> Result<Self> {
        MaternActivation::new(p)
    }
}

impl From<MaternActivation> for MaternParams {
    fn from(a: MaternActivation) -> Self {
        a.params
    }
}

impl MaternActivation {
    /// Requires ν ≥ ½; below that the activation is unbounded at the origin.
    pub fn new(params: MaternParams) -> Result<Self> {
        if params.nu() < 0.5 {
            return Err(Error::domain(format!(
                "Matérn activation requires nu >= 1/2, got {}",
                params.nu()
            )));
        }
        let ln_coef = 0.5 * params.ln_q_sq() - ln_gamma(params.nu() + 0.5);
        Ok(MaternActivation { params, ln_coef })
    }

    pub fn params(&self) -> &MaternParams {
        &self.params
    }

    /// ln(q / Γ(ν+½))
    pub fn ln_coef(&self) -> f64 {
        self.ln_coef
    }

    /// Location of the maximum, x* = (ν−½)/λ.
    pub fn argmax(&self) -> f64 {
        (self.params.nu() - 0.5) / self.params.lambda()
    }

    pub fn value(&self, x: f64) -> f64 {
        let nu = self.params.nu();
        if x < 0.0 {
            0.0
        } else if x == 0.0 {
            if nu == 0.5 {
                self.ln_coef.exp()
            } else {
                0.0
            }
        } else {
            self.ln_value(x).exp()
        }
    }

    /// ln σ(x) for x > 0.
    fn ln_value(&self, x: f64) -> f64 {
        self.ln_coef + (self.params.nu() - 0.5) * x.ln() - self.params.lambda() * x
    }

    /// dσ/dx. At the origin the right limit is returned when it is finite
    /// (ν ≥ 3/2); otherwise 0 is used as a subgradient.
    pub fn derivative(&self, x: f64) -> f64 {
        let nu = self.params.nu();
        let lambda = self.params.lambda();
        if x < 0.0 {
            0.0
        } else if x == 0.0 {
            if nu == 1.5 {
                self.ln_coef.exp()
            } else {
                0.0
            }
        } else {
            self.ln_value(x).exp() * ((nu - 0.5) / x - lambda)
        }
    }
}

/// Choice of nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ActivationKind {
    Matern(MaternActivation),
    /// exp(−(x − center)² / width²)
    Rbf { center: f64, width: f64 },
    Relu,
    Step,
    Erf,
    Identity,
}

impl ActivationKind {
    pub fn matern(nu: f64, ell: f64) -> Result<Self> {
        Ok(ActivationKind::Matern(MaternActivation::new(
            MaternParams::new(nu, ell)?,
        )?))
    }

    pub fn rbf(center: f64, width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) || !center.is_finite() {
            return Err(Error::domain(format!(
                "RBF activation needs a finite center and width > 0, got ({center}, {width})"
            )));
        }
        Ok(ActivationKind::Rbf { center, width })
    }

    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            ActivationKind::Matern(ref m) => m.value(x),
            ActivationKind::Rbf { center, width } => {
                let u = (x - center) / width;
                (-u * u).exp()
            }
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::Step => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Erf => erf(x),
            ActivationKind::Identity => x,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            ActivationKind::Matern(ref m) => m.derivative(x),
            ActivationKind::Rbf { center, width } => {
                let u = (x - center) / width;
                -2.0 * u / width * (-u * u).exp()
            }
            ActivationKind::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Step => 0.0,
            ActivationKind::Erf => 2.0 / PI.sqrt() * (-x * x).exp(),
            ActivationKind::Identity => 1.0,
        }
    }
}

/// q = sqrt(2√π λ^{2ν} Γ(ν+½)/Γ(ν)).
pub fn matern_q(p: &MaternParams) -> f64 {
    p.q()
}

pub fn activate(a: &ActivationKind, x: f64) -> f64 {
    a.apply(x)
}

pub fn activate_grad(a: &ActivationKind, x: f64) -> f64 {
    a.derivative(x)
}

/// Center c = (ν+½)/√(2ν) of the Gaussian bump the Matérn activation
/// approaches for large ν (at ℓ = 1), together with the activation's peak
/// value σ(x*).
pub fn rbf_limit_of_matern(p: &MaternParams) -> Result<(f64, f64)> {
    if p.nu() < 10.0 {
        return Err(Error::domain(format!(
            "RBF limit is only validated for nu >= 10, got {}",
            p.nu()
        )));
    }
    if (p.ell() - 1.0).abs() > 1e-12 {
        return Err(Error::domain(format!(
            "RBF limit is stated for ell = 1, got {}",
            p.ell()
        )));
    }
    let act = MaternActivation::new(*p)?;
    let center = (p.nu() + 0.5) / (2.0 * p.nu()).sqrt();
    let amplitude = act.value(act.argmax());
    Ok((center, amplitude))
}
