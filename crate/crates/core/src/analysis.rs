//! Closed-form performance predictors and the empirical MSE metric.
//!
//! - [`crlb_nss`]: `K σ_n² / N` for batch recovery with a perfectly incoherent
//!   sensing matrix.
//! - [`msd_recursion_step`]: the mean-square-deviation recursion of the RZA-NLMF
//!   filter, `b(n+1) = A₁ b + A₂ b² + A₃ b³ + C + φ`, with the attractor
//!   contribution `φ` replaced by its bound `ρ² K`.
//! - [`crlb_ass`]: the steady state `b(∞)` of the linearized recursion.
//!
//! The recursion coefficients are exposed individually ([`MsdCoefficients`]) so
//! alternative readings of individual terms can be compared.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::linalg::dist_sq;

/// Fourth moment of a zero-mean Gaussian: `E[z⁴] = 3σ⁴`.
pub const GAUSSIAN_FOURTH_MOMENT: f64 = 3.0;
/// Sixth moment of a zero-mean Gaussian: `E[z⁶] = 15σ⁶`.
pub const GAUSSIAN_SIXTH_MOMENT: f64 = 15.0;

/// Relative size below which a denominator counts as zero.
const SINGULAR_TOL: f64 = 1e-12;

/// Quantities feeding the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrlbInputs {
    pub n_dim: usize,
    pub k_sparsity: usize,
    /// Noise variance σ_n².
    pub sigma_n_sq: f64,
    /// Sensing-entry variance σ².
    pub sigma_sq: f64,
    pub mu_iss: f64,
    pub rho: f64,
}

impl CrlbInputs {
    pub fn validate(&self) -> Result<()> {
        if self.n_dim == 0 {
            return Err(invalid("n_dim must be positive"));
        }
        if self.k_sparsity > self.n_dim {
            return Err(Error::InvalidSparsity {
                k: self.k_sparsity,
                n: self.n_dim,
            });
        }
        if !(self.sigma_n_sq >= 0.0 && self.sigma_n_sq.is_finite()) {
            return Err(invalid("sigma_n_sq must be non-negative"));
        }
        if !(self.sigma_sq > 0.0 && self.sigma_sq.is_finite()) {
            return Err(invalid("sigma_sq must be positive"));
        }
        if !(self.mu_iss > 0.0 && self.mu_iss.is_finite()) {
            return Err(invalid("mu_iss must be positive"));
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return Err(invalid("rho must be non-negative"));
        }
        Ok(())
    }
}

/// `K σ_n² / N`
pub fn crlb_nss(inp: &CrlbInputs) -> Result<f64> {
    inp.validate()?;
    Ok(inp.k_sparsity as f64 * inp.sigma_n_sq / inp.n_dim as f64)
}

/// Coefficients of `b(n+1) = linear·b + quadratic·b² + cubic·b³ + drive + phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsdCoefficients {
    /// `1 + (27μ²σ_n⁴ − 6μσ_n²)/N`
    pub linear: f64,
    /// `(27μ²σ_n²σ² − 6μσ²)/N + 18μ²σ²/(Nσ²)`
    pub quadratic: f64,
    /// `15μ²σ_n²σ⁴/N`
    pub cubic: f64,
    /// `−15μ²σ_n⁶/(Nσ²)`
    pub drive: f64,
    /// Attractor term bounded by `ρ²K`.
    pub phi: f64,
}

impl MsdCoefficients {
    pub fn new(inp: &CrlbInputs) -> Result<Self> {
        inp.validate()?;
        let n = inp.n_dim as f64;
        let mu = inp.mu_iss;
        let sn2 = inp.sigma_n_sq;
        let s2 = inp.sigma_sq;
        // 27 = 9·E[z⁴]/σ_n⁴ from the 9μ²E[z⁴(vᵀx)²] term
        let linear = 1.0 + (9.0 * GAUSSIAN_FOURTH_MOMENT * mu * mu * sn2 * sn2 - 6.0 * mu * sn2) / n;
        // the printed "2μ·3σ²" token is read as 6μσ²
        let quadratic =
            (27.0 * mu * mu * sn2 * s2 - 6.0 * mu * s2) / n + 18.0 * mu * mu * s2 / (n * s2);
        let cubic = GAUSSIAN_SIXTH_MOMENT * mu * mu * sn2 * s2 * s2 / n;
        let drive = -GAUSSIAN_SIXTH_MOMENT * mu * mu * sn2 * sn2 * sn2 / (n * s2);
        let phi = inp.rho * inp.rho * inp.k_sparsity as f64;
        Ok(Self {
            linear,
            quadratic,
            cubic,
            drive,
            phi,
        })
    }

    /// Full recursion step, including the `b²` and `b³` terms.
    pub fn step(&self, b: f64) -> f64 {
        self.linear * b + self.quadratic * b * b + self.cubic * b * b * b + self.drive + self.phi
    }

    /// Step with the higher-order terms dropped.
    pub fn step_linearized(&self, b: f64) -> f64 {
        self.linear * b + self.drive + self.phi
    }

    pub fn is_contraction(&self) -> bool {
        libm::fabs(self.linear) < 1.0
    }
}

/// One step of the MSD recursion with `φ(n) := ρ²K`.
pub fn msd_recursion_step(b: f64, inp: &CrlbInputs) -> Result<f64> {
    if b.is_nan() || b < 0.0 {
        return Err(invalid("b must be non-negative"));
    }
    Ok(MsdCoefficients::new(inp)?.step(b))
}

/// Which form of the recursion to iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecursionOrder {
    Full,
    Linearized,
}

/// Predicted `b(0..=steps)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MsdTrajectory {
    values: Vec<f64>,
}

impl MsdTrajectory {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("trajectory holds b(0)")
    }
}

/// Iterates the recursion from `b0`. Refuses parameter sets whose linear
/// coefficient is not a contraction.
pub fn msd_trajectory(
    inp: &CrlbInputs,
    b0: f64,
    steps: usize,
    order: RecursionOrder,
) -> Result<MsdTrajectory> {
    if !(b0 >= 0.0 && b0.is_finite()) {
        return Err(invalid("b0 must be finite and non-negative"));
    }
    let coeffs = MsdCoefficients::new(inp)?;
    if !coeffs.is_contraction() {
        return Err(Error::NotContracting {
            coefficient: coeffs.linear,
        });
    }
    let mut values = Vec::with_capacity(steps + 1);
    let mut b = b0;
    values.push(b);
    for _ in 0..steps {
        b = match order {
            RecursionOrder::Full => coeffs.step(b),
            RecursionOrder::Linearized => coeffs.step_linearized(b),
        };
        if !b.is_finite() {
            return Err(invalid("recursion left the finite range"));
        }
        values.push(b);
    }
    Ok(MsdTrajectory { values })
}

/// Steady-state prediction for the RZA-NLMF filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssBound {
    pub value: f64,
    /// `value > 0` and the linearized recursion is a contraction.
    pub valid: bool,
}

/// `5μσ_n⁴/(9μσ_n²σ² − 2σ²) − ρ²NK/(27μ²σ_n⁴ − 6μσ_n²)`, returned as computed.
///
/// With `ρ = 0` the second term is dropped entirely, so the noiseless limit is 0.
pub fn crlb_ass(inp: &CrlbInputs) -> Result<AssBound> {
    inp.validate()?;
    let n = inp.n_dim as f64;
    let k = inp.k_sparsity as f64;
    let mu = inp.mu_iss;
    let sn2 = inp.sigma_n_sq;
    let s2 = inp.sigma_sq;

    let den_noise = 9.0 * mu * sn2 * s2 - 2.0 * s2;
    if libm::fabs(den_noise) <= SINGULAR_TOL * (9.0 * mu * sn2 * s2 + 2.0 * s2) {
        return Err(Error::Singular {
            denominator: "9·mu·sigma_n²·sigma² − 2·sigma²",
        });
    }
    let mut value = 5.0 * mu * sn2 * sn2 / den_noise;

    if inp.rho != 0.0 {
        let den_attr = 27.0 * mu * mu * sn2 * sn2 - 6.0 * mu * sn2;
        if libm::fabs(den_attr) <= SINGULAR_TOL * (27.0 * mu * mu * sn2 * sn2 + 6.0 * mu * sn2) {
            return Err(Error::Singular {
                denominator: "27·mu²·sigma_n⁴ − 6·mu·sigma_n²",
            });
        }
        value -= inp.rho * inp.rho * n * k / den_attr;
    }

    let contraction = MsdCoefficients::new(inp)?.is_contraction();
    Ok(AssBound {
        value,
        valid: value > 0.0 && contraction,
    })
}

/// `‖h − h̃‖²`
pub fn squared_error(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    crate::error::check_len(truth.len(), estimate.len())?;
    Ok(dist_sq(truth, estimate))
}

/// Mean over trials of `‖h − h̃‖²` against a single ground truth.
pub fn empirical_mse<E: AsRef<[f64]>>(truth: &[f64], estimates: &[E]) -> Result<f64> {
    average_mse(estimates.iter().map(|e| (truth, e.as_ref())))
}

/// Mean of `‖hₜ − h̃ₜ‖²` over `(truth, estimate)` pairs, one per trial.
pub fn average_mse<'a, I>(pairs: I) -> Result<f64>
where
    I: IntoIterator<Item = (&'a [f64], &'a [f64])>,
{
    let mut sum = 0.0;
    let mut count = 0usize;
    for (truth, est) in pairs {
        sum += squared_error(truth, est)?;
        count += 1;
    }
    if count == 0 {
        return Err(invalid("at least one trial is required"));
    }
    Ok(sum / count as f64)
}
