//! Matérn-family activation functions and the machinery around them.
//!
//! The crate covers the special functions behind the Matérn kernel, the exact
//! stationary and locally stationary covariance functions, the activation
//! functions obtained from spectral factorization of the Matérn spectral
//! density, a Monte Carlo estimator of single-hidden-layer network kernels,
//! the closed-form RBF eigenbasis, a small dense network with MC dropout,
//! exact GP regression, uncertainty metrics and dataset utilities.

pub mod activations;
pub mod data;
pub mod error;
pub mod gp;
pub mod io;
pub mod kernels;
pub mod mc_kernel;
pub mod metrics;
pub mod nn;
pub mod rbf_eigen;
pub mod specfun;

pub use error::{Error, Result};
