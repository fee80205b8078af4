//! NLMF and RZA-NLMF adaptive filters used as an online sparse recovery method.
//!
//! At iteration `n` the filter consumes one stored measurement pair
//! `(x_m, y_m)` with `m = n mod M` and applies
//!
//! ```text
//! e        = y_m − x_mᵀ h̃(n)
//! μ_ass(n) = μ_iss e² / (‖x_m‖² + e²)
//! h̃(n+1)  = h̃(n) + μ_ass(n) e x_m / ‖x_m‖² − ρ sgn(h̃(n)) / (1 + ε|h̃(n)|)
//! ```
//!
//! The last term is the reweighted zero attractor: the gradient of the
//! log-sum penalty `(ρ/ε) Σ log(1 + ε|h̃ᵢ|)`. It is subtracted, so small
//! coefficients are pulled toward zero. The plain NLMF filter is the same
//! update with `ρ = 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, invalid, Error, Result};
use crate::linalg::{dist_sq, dot, norm_sq, sgn};
use crate::model::{MeasurementSet, SensingEnsemble, SparseSignal};

/// Hyperparameters of the RZA-NLMF filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterParams {
    mu_iss: f64,
    lambda_ass: f64,
    epsilon: f64,
    rho: f64,
    zeta: f64,
    n_max: u64,
}

impl FilterParams {
    pub const DEFAULT_ZETA: f64 = 0.0;
    pub const DEFAULT_N_MAX: u64 = 20_000;

    /// Builds parameters with `ρ = μ_iss · λ · ε`, `ζ = 0` and `n_max = 2·10⁴`.
    pub fn new(mu_iss: f64, lambda_ass: f64, epsilon: f64) -> Result<Self> {
        if !(mu_iss > 0.0 && mu_iss.is_finite()) {
            return Err(invalid("mu_iss must be positive"));
        }
        if !(lambda_ass >= 0.0 && lambda_ass.is_finite()) {
            return Err(invalid("lambda must be non-negative"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(invalid("epsilon must be positive"));
        }
        Ok(Self {
            mu_iss,
            lambda_ass,
            epsilon,
            rho: mu_iss * lambda_ass * epsilon,
            zeta: Self::DEFAULT_ZETA,
            n_max: Self::DEFAULT_N_MAX,
        })
    }

    /// Reference settings: `μ_iss = 1.5`, `λ = 5·10⁻⁸`, `ε = 2000`.
    pub fn reference() -> Self {
        Self::new(1.5, 5e-8, 2000.0).expect("valid constants")
    }

    /// Overrides the attractor gain.
    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(invalid("rho must be non-negative"));
        }
        self.rho = rho;
        Ok(self)
    }

    /// Uses the printed `ρ = μ_iss · λ / ε` instead of the gradient-consistent default.
    pub fn with_printed_rho(self) -> Self {
        let rho = self.mu_iss * self.lambda_ass / self.epsilon;
        Self { rho, ..self }
    }

    /// Stop tolerance on `‖h̃(n+1) − h̃(n)‖₂`. `+∞` stops after one update.
    pub fn with_zeta(mut self, zeta: f64) -> Result<Self> {
        if zeta.is_nan() || zeta < 0.0 {
            return Err(invalid("zeta must be non-negative"));
        }
        self.zeta = zeta;
        Ok(self)
    }

    pub fn with_n_max(mut self, n_max: u64) -> Result<Self> {
        if n_max == 0 {
            return Err(invalid("n_max must be at least 1"));
        }
        self.n_max = n_max;
        Ok(self)
    }

    pub fn mu_iss(&self) -> f64 {
        self.mu_iss
    }

    pub fn lambda_ass(&self) -> f64 {
        self.lambda_ass
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }
}

/// The evolving estimate `h̃(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    estimate: Vec<f64>,
    iteration: u64,
    last_error: f64,
    last_step: f64,
}

impl FilterState {
    /// `h̃(0) = 0`.
    pub fn zeros(n: usize) -> Self {
        Self::from_estimate(vec![0.0; n])
    }

    pub fn from_estimate(estimate: Vec<f64>) -> Self {
        Self {
            estimate,
            iteration: 0,
            last_error: 0.0,
            last_step: 0.0,
        }
    }

    pub fn estimate(&self) -> &[f64] {
        &self.estimate
    }

    pub fn into_estimate(self) -> Vec<f64> {
        self.estimate
    }

    /// Number of updates applied so far.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    /// `e_m(n)` of the most recent update.
    pub fn last_error(&self) -> f64 {
        self.last_error
    }

    /// `μ_ass(n)` of the most recent update.
    pub fn last_step(&self) -> f64 {
        self.last_step
    }
}

/// Which update rule to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Nlmf,
    RzaNlmf,
}

/// `e_m(n) = y_m − x_mᵀ h̃(n)`
pub fn prediction_error(state: &FilterState, x_m: &[f64], y_m: f64) -> Result<f64> {
    check_len(state.estimate.len(), x_m.len())?;
    Ok(y_m - dot(x_m, &state.estimate))
}

/// `μ_ass = μ_iss e² / (‖x_m‖² + e²)`, always in `[0, μ_iss)`.
pub fn variable_step_size(params: &FilterParams, x_m: &[f64], e: f64) -> Result<f64> {
    let xx = norm_sq(x_m);
    if xx == 0.0 {
        return Err(Error::DegenerateRow);
    }
    Ok(step_from_norm(params.mu_iss, xx, e))
}

#[inline]
fn step_from_norm(mu_iss: f64, xx: f64, e: f64) -> f64 {
    let ee = e * e;
    if ee.is_infinite() {
        return mu_iss.next_down();
    }
    // e² ≫ ‖x‖² rounds to μ_iss; the step stays strictly below it
    (mu_iss * ee / (xx + ee)).min(mu_iss.next_down())
}

/// Elementwise `ρ sgn(h̃ᵢ) / (1 + ε|h̃ᵢ|)`.
pub fn zero_attractor(estimate: &[f64], rho: f64, epsilon: f64) -> Vec<f64> {
    estimate
        .iter()
        .map(|&h| attractor_entry(h, rho, epsilon))
        .collect()
}

#[inline]
fn attractor_entry(h: f64, rho: f64, epsilon: f64) -> f64 {
    rho * sgn(h) / (1.0 + epsilon * libm::fabs(h))
}

/// `Σ log(1 + ε|hᵢ|)`, the sparsity penalty whose scaled gradient is the attractor.
pub fn log_sum_penalty(estimate: &[f64], epsilon: f64) -> f64 {
    estimate
        .iter()
        .map(|h| libm::log1p(epsilon * libm::fabs(*h)))
        .sum()
}

/// One RZA-NLMF step. Returns the new state; the input is left untouched.
pub fn rza_nlmf_update(
    state: &FilterState,
    params: &FilterParams,
    x_m: &[f64],
    y_m: f64,
) -> Result<FilterState> {
    let mut next = state.clone();
    step_in_place(&mut next, params, params.rho, x_m, y_m)?;
    Ok(next)
}

/// One NLMF step (the RZA-NLMF step with `ρ = 0`).
pub fn nlmf_update(
    state: &FilterState,
    params: &FilterParams,
    x_m: &[f64],
    y_m: f64,
) -> Result<FilterState> {
    let mut next = state.clone();
    step_in_place(&mut next, params, 0.0, x_m, y_m)?;
    Ok(next)
}

/// Applies one update and returns `‖h̃(n+1) − h̃(n)‖²`.
fn step_in_place(
    state: &mut FilterState,
    params: &FilterParams,
    rho: f64,
    x_m: &[f64],
    y_m: f64,
) -> Result<f64> {
    check_len(state.estimate.len(), x_m.len())?;
    let xx = norm_sq(x_m);
    if xx == 0.0 {
        return Err(Error::DegenerateRow);
    }
    let e = y_m - dot(x_m, &state.estimate);
    let mu = step_from_norm(params.mu_iss, xx, e);
    let gain = mu * e / xx;
    let mut moved = 0.0;
    for (h, &x) in state.estimate.iter_mut().zip(x_m) {
        let delta = gain * x - attractor_entry(*h, rho, params.epsilon);
        *h += delta;
        moved += delta * delta;
    }
    state.iteration += 1;
    state.last_error = e;
    state.last_step = mu;
    if !state.estimate.iter().all(|v| v.is_finite()) || !moved.is_finite() {
        return Err(Error::Diverged {
            iteration: state.iteration,
        });
    }
    Ok(moved)
}

/// Row visited at (zero-based) iteration `n` when replaying `m_rows` measurements.
#[inline]
pub fn row_index(n: u64, m_rows: usize) -> usize {
    (n % m_rows as u64) as usize
}

/// Why a replay run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// `‖h̃(n+1) − h̃(n)‖₂ < ζ`.
    Converged,
    /// `n_max` updates were applied.
    MaxIterations,
}

/// Output of [`run_adaptive`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveRun {
    pub state: FilterState,
    /// `‖h − h̃(n)‖²` for `n = 0..=state.iteration()`; empty without ground truth.
    pub mse: Vec<f64>,
    pub stop: StopReason,
}

/// Runs an adaptive filter from `h̃(0) = 0`, cycling through the stored measurements.
pub fn run_adaptive(
    kind: FilterKind,
    measurements: &MeasurementSet,
    ensemble: &SensingEnsemble,
    params: &FilterParams,
    truth: Option<&SparseSignal>,
) -> Result<AdaptiveRun> {
    let m_rows = ensemble.m_rows();
    if measurements.is_empty() || m_rows == 0 {
        return Err(invalid("empty measurement set"));
    }
    check_len(m_rows, measurements.len())?;
    let n = ensemble.n_cols();
    if let Some(h) = truth {
        check_len(n, h.len())?;
    }
    let rho = match kind {
        FilterKind::Nlmf => 0.0,
        FilterKind::RzaNlmf => params.rho,
    };
    let zeta_sq = params.zeta * params.zeta;
    let y = measurements.observations();

    let mut state = FilterState::zeros(n);
    let mut mse = Vec::new();
    if let Some(h) = truth {
        mse.reserve(params.n_max as usize + 1);
        mse.push(dist_sq(h.coefficients(), &state.estimate));
    }
    let mut stop = StopReason::MaxIterations;
    for it in 0..params.n_max {
        let m = row_index(it, m_rows);
        let moved = step_in_place(&mut state, params, rho, ensemble.row(m), y[m])?;
        if let Some(h) = truth {
            mse.push(dist_sq(h.coefficients(), &state.estimate));
        }
        if moved < zeta_sq {
            stop = StopReason::Converged;
            break;
        }
    }
    Ok(AdaptiveRun { state, mse, stop })
}

/// [`run_adaptive`] with the RZA-NLMF update.
pub fn run_ass(
    measurements: &MeasurementSet,
    ensemble: &SensingEnsemble,
    params: &FilterParams,
    truth: Option<&SparseSignal>,
) -> Result<AdaptiveRun> {
    run_adaptive(FilterKind::RzaNlmf, measurements, ensemble, params, truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::model::NoiseModel;

    fn params() -> FilterParams {
        FilterParams::new(1.5, 5e-8, 2000.0).unwrap()
    }

    #[test]
    fn rho_defaults() {
        let p = params();
        assert!((p.rho() - 1.5e-4).abs() < 1e-18);
        assert!((p.with_printed_rho().rho() - 3.75e-11).abs() < 1e-24);
        assert_eq!(p.zeta(), 0.0);
        assert_eq!(p.n_max(), 20_000);
    }

    #[test]
    fn params_validation() {
        assert!(FilterParams::new(0.0, 1.0, 1.0).is_err());
        assert!(FilterParams::new(1.0, -1.0, 1.0).is_err());
        assert!(FilterParams::new(1.0, 1.0, 0.0).is_err());
        assert!(params().with_n_max(0).is_err());
        assert!(params().with_zeta(-1.0).is_err());
        assert!(params().with_zeta(f64::NAN).is_err());
        assert!(params().with_rho(-1.0).is_err());
    }

    #[test]
    fn prediction_error_examples() {
        let s = FilterState::from_estimate(vec![1.0, 2.0]);
        assert_eq!(prediction_error(&s, &[3.0, -1.0], 5.0).unwrap(), 4.0);
        let z = FilterState::zeros(2);
        assert_eq!(prediction_error(&z, &[3.0, -1.0], 5.0).unwrap(), 5.0);
        let h = [0.5, -0.25];
        let x = [2.0, 4.0];
        let exact = FilterState::from_estimate(h.to_vec());
        assert_eq!(prediction_error(&exact, &x, dot(&x, &h)).unwrap(), 0.0);
        assert!(prediction_error(&z, &[1.0], 0.0).is_err());
    }

    #[test]
    fn step_size_examples() {
        let p = params();
        assert_eq!(variable_step_size(&p, &[1.0, 0.0], 0.0).unwrap(), 0.0);
        assert_eq!(variable_step_size(&p, &[1.0, 0.0], 1.0).unwrap(), 0.75);
        let big = variable_step_size(&p, &[1.0, 0.0], 1e6).unwrap();
        assert!(big < 1.5 && big > 1.5 - 1e-11);
        let huge = variable_step_size(&p, &[1.0, 0.0], 1e200).unwrap();
        assert!(huge < 1.5);
        assert_eq!(
            variable_step_size(&p, &[0.0, 0.0], 1.0),
            Err(Error::DegenerateRow)
        );
    }

    #[test]
    fn attractor_examples() {
        assert_eq!(zero_attractor(&[0.0, -0.0], 0.1, 2000.0), vec![0.0, 0.0]);
        let eps = 2000.0;
        let a = zero_attractor(&[1.0 / eps, -1.0 / eps], 0.3, eps);
        assert!((a[0] - 0.15).abs() < 1e-16);
        assert!((a[1] + 0.15).abs() < 1e-16);
    }

    #[test]
    fn single_step_from_zero() {
        let p = params().with_rho(0.0).unwrap();
        let s = FilterState::zeros(2);
        let next = rza_nlmf_update(&s, &p, &[1.0, 0.0], 1.0).unwrap();
        assert_eq!(next.estimate(), &[0.75, 0.0]);
        assert_eq!(next.iteration(), 1);
        assert_eq!(next.last_error(), 1.0);
        assert_eq!(next.last_step(), 0.75);
        let plain = nlmf_update(&s, &params(), &[1.0, 0.0], 1.0).unwrap();
        assert_eq!(plain.estimate(), &[0.75, 0.0]);
    }

    #[test]
    fn zero_error_at_zero_is_fixed_point() {
        let s = FilterState::zeros(3);
        let next = rza_nlmf_update(&s, &params(), &[1.0, 2.0, 3.0], 0.0).unwrap();
        assert_eq!(next.estimate(), s.estimate());
        assert_eq!(next.iteration(), 1);
        let plain = nlmf_update(&s, &params(), &[1.0, 2.0, 3.0], 0.0).unwrap();
        assert_eq!(plain.estimate(), s.estimate());
    }

    #[test]
    fn nlmf_equals_rza_without_attractor() {
        let p = params();
        let p0 = p.with_rho(0.0).unwrap();
        let s = FilterState::from_estimate(vec![0.3, -0.001, 0.0, 2.0]);
        let x = [0.5, -1.0, 2.0, 0.25];
        let a = nlmf_update(&s, &p, &x, 0.7).unwrap();
        let b = rza_nlmf_update(&s, &p0, &x, 0.7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_row_is_an_error() {
        let s = FilterState::zeros(2);
        assert_eq!(
            rza_nlmf_update(&s, &params(), &[0.0, 0.0], 1.0),
            Err(Error::DegenerateRow)
        );
    }

    #[test]
    fn divergence_is_reported() {
        let p = params().with_rho(0.0).unwrap();
        let s = FilterState::from_estimate(vec![f64::MAX, 0.0]);
        let r = rza_nlmf_update(&s, &p, &[1.0, 1.0], -f64::MAX);
        assert_eq!(r, Err(Error::Diverged { iteration: 1 }));
    }

    #[test]
    fn replay_covers_each_row_twice() {
        let m = 7;
        let visited: Vec<usize> = (0..2 * m as u64).map(|n| row_index(n, m)).collect();
        let expected: Vec<usize> = (0..m).chain(0..m).collect();
        assert_eq!(visited, expected);
    }

    fn tiny_system() -> (SensingEnsemble, MeasurementSet, SparseSignal) {
        let x = Matrix::from_row_major(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let ens = SensingEnsemble::from_matrix(x, 1.0).unwrap();
        let h = SparseSignal::from_dense(vec![1.0, 0.0]);
        let y = MeasurementSet::new(vec![1.0, 0.0], NoiseModel::noiseless());
        (ens, y, h)
    }

    #[test]
    fn infinite_zeta_stops_after_one_update() {
        let (ens, y, h) = tiny_system();
        let p = params().with_zeta(f64::INFINITY).unwrap();
        let run = run_ass(&y, &ens, &p, Some(&h)).unwrap();
        assert_eq!(run.state.iteration(), 1);
        assert_eq!(run.stop, StopReason::Converged);
        assert_eq!(run.mse.len(), 2);
        assert_eq!(run.mse[0], 1.0);
    }

    #[test]
    fn runs_to_n_max_without_tolerance() {
        let (ens, y, h) = tiny_system();
        let p = params().with_n_max(10).unwrap();
        let run = run_ass(&y, &ens, &p, Some(&h)).unwrap();
        assert_eq!(run.state.iteration(), 10);
        assert_eq!(run.stop, StopReason::MaxIterations);
        assert_eq!(run.mse.len(), 11);
        let no_truth = run_ass(&y, &ens, &p, None).unwrap();
        assert!(no_truth.mse.is_empty());
        assert_eq!(no_truth.state, run.state);
    }

    #[test]
    fn run_rejects_bad_shapes() {
        let (ens, _, h) = tiny_system();
        let short = MeasurementSet::new(vec![1.0], NoiseModel::noiseless());
        assert!(run_ass(&short, &ens, &params(), Some(&h)).is_err());
        let empty = MeasurementSet::new(vec![], NoiseModel::noiseless());
        assert!(matches!(
            run_ass(&empty, &ens, &params(), None),
            Err(Error::InvalidArgument(_))
        ));
    }
}
