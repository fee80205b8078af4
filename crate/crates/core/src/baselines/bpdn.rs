//! Basis pursuit denoising, `min ½‖y − Xh‖² + λ‖h‖₁`, by proximal gradient (ISTA).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, invalid, Result};
use crate::linalg::{gram_spectral_norm, norm_l1, norm_sq, Matrix};
use crate::model::{MeasurementSet, SensingEnsemble};

/// Slack applied to the power-iteration estimate of `λ_max(XᵀX)`.
const LIPSCHITZ_INFLATION: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpdnConfig {
    lambda_nss: f64,
    max_iters: usize,
    tolerance: f64,
}

impl BpdnConfig {
    pub const DEFAULT_MAX_ITERS: usize = 10_000;
    pub const DEFAULT_TOLERANCE: f64 = 1e-12;

    pub fn new(lambda_nss: f64, max_iters: usize, tolerance: f64) -> Result<Self> {
        if !(lambda_nss >= 0.0 && lambda_nss.is_finite()) {
            return Err(invalid("lambda must be non-negative"));
        }
        if max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        if tolerance.is_nan() || tolerance < 0.0 {
            return Err(invalid("tolerance must be non-negative"));
        }
        Ok(Self {
            lambda_nss,
            max_iters,
            tolerance,
        })
    }

    /// `λ = σ_n √(2 ln N)` with default iteration limits.
    pub fn for_noise(sigma_n: f64, n: usize) -> Result<Self> {
        let lambda = sigma_n * libm::sqrt(2.0 * libm::log(n as f64));
        Self::new(lambda, Self::DEFAULT_MAX_ITERS, Self::DEFAULT_TOLERANCE)
    }

    pub fn lambda_nss(&self) -> f64 {
        self.lambda_nss
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BpdnSolution {
    pub estimate: Vec<f64>,
    pub iterations: usize,
    /// Objective after each iteration, starting with the value at `h = 0`.
    pub objective: Vec<f64>,
    /// Whether the relative objective change fell below the tolerance.
    pub converged: bool,
    /// Step size used, `1/L̂`.
    pub step: f64,
}

#[inline]
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// `½‖y − Xh‖² + λ‖h‖₁`
pub fn bpdn_objective(x: &Matrix, y: &[f64], h: &[f64], lambda: f64) -> Result<f64> {
    let xh = x.mul_vec(h)?;
    check_len(x.rows(), y.len())?;
    let r: f64 = y.iter().zip(&xh).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(0.5 * r + lambda * norm_l1(h))
}

pub fn bpdn_solve(
    ensemble: &SensingEnsemble,
    y: &MeasurementSet,
    cfg: &BpdnConfig,
) -> Result<BpdnSolution> {
    let x = ensemble.matrix();
    let y = y.observations();
    check_len(x.rows(), y.len())?;
    if !y.iter().all(|v| v.is_finite()) {
        return Err(invalid("observations must be finite"));
    }
    let lipschitz = gram_spectral_norm(x, 10_000, 1e-12) * LIPSCHITZ_INFLATION;
    let step = 1.0 / lipschitz;
    let threshold = cfg.lambda_nss * step;

    let n = x.cols();
    let mut h = vec![0.0; n];
    let mut residual = y.to_vec();
    let mut current = 0.5 * norm_sq(&residual);
    let mut objective = Vec::with_capacity(cfg.max_iters.min(1 << 16) + 1);
    objective.push(current);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        let grad = x.tr_mul_vec(&residual)?;
        for (hi, gi) in h.iter_mut().zip(&grad) {
            *hi = soft_threshold(*hi + step * gi, threshold);
        }
        let xh = x.mul_vec(&h)?;
        for ((r, yi), v) in residual.iter_mut().zip(y).zip(&xh) {
            *r = yi - v;
        }
        let next = 0.5 * norm_sq(&residual) + cfg.lambda_nss * norm_l1(&h);
        iterations += 1;
        objective.push(next);
        let change = libm::fabs(current - next);
        current = next;
        // a zero tolerance runs to max_iters
        if cfg.tolerance > 0.0 && change <= cfg.tolerance * current.max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
    }

    Ok(BpdnSolution {
        estimate: h,
        iterations,
        objective,
        converged,
        step,
    })
}
