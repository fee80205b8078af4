//! Adaptive sparse sensing with the reweighted zero-attracting normalized
//! least mean fourth (RZA-NLMF) filter.
//!
//! The crate is `no_std` and only needs `alloc`. It contains:
//!
//! - [`model`]: K-sparse ground truth, Gaussian sensing matrices, noisy measurements
//!   and deterministic per-trial random streams.
//! - [`filters`]: the NLMF and RZA-NLMF update rules and the cyclic replay driver.
//! - [`baselines`]: batch recovery by basis pursuit denoising (proximal gradient) and
//!   orthogonal matching pursuit.
//! - [`analysis`]: closed-form steady-state predictors and the empirical MSE metric.
//!
//! IO, configuration and the Monte Carlo runner live in the `rzasense-harness` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod baselines;
mod error;
pub mod filters;
pub mod linalg;
pub mod model;

pub use error::{Error, Result};
