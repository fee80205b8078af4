//! Closed-form bounds per `(K, SNR)` and their comparison with simulated curves.

use std::io::Write;

use rzasense_core::analysis::{crlb_ass, crlb_nss, CrlbInputs};
use rzasense_core::model::snr_to_noise_variance;

use crate::config::{ExperimentConfig, Solver};
use crate::error::{HarnessError, Result};
use crate::output::format_f64;
use crate::runner::MseCurve;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub k: usize,
    pub snr_db: f64,
    pub sigma_n_sq: f64,
    pub crlb_nss: f64,
    /// `NaN` when the steady-state expression is singular.
    pub crlb_ass: f64,
    pub crlb_ass_valid: bool,
}

/// Bounds for every `(K, SNR)` of the config. The attractor gain is taken at the
/// first reweighted factor of `epsilon_list`.
pub fn bounds_table(cfg: &ExperimentConfig) -> Result<Vec<BoundRow>> {
    let rho = cfg.filter_params(cfg.epsilon_list[0])?.rho();
    let mut rows = Vec::new();
    for &k in &cfg.k_list {
        for &snr_db in &cfg.snr_list {
            let sigma_n_sq = snr_to_noise_variance(snr_db, 1.0);
            let inp = CrlbInputs {
                n_dim: cfg.n_dim,
                k_sparsity: k,
                sigma_n_sq,
                sigma_sq: cfg.sigma_sq,
                mu_iss: cfg.mu_iss,
                rho,
            };
            let (crlb_ass, crlb_ass_valid) = match crlb_ass(&inp) {
                Ok(b) => (b.value, b.valid),
                Err(rzasense_core::Error::Singular { .. }) => (f64::NAN, false),
                Err(e) => return Err(e.into()),
            };
            rows.push(BoundRow {
                k,
                snr_db,
                sigma_n_sq,
                crlb_nss: crlb_nss(&inp)?,
                crlb_ass,
                crlb_ass_valid,
            });
        }
    }
    Ok(rows)
}

pub const BOUNDS_HEADER: &str = "k,snr_db,sigma_n_sq,crlb_nss,crlb_ass,crlb_ass_valid";

pub fn write_bounds<W: Write>(w: &mut W, rows: &[BoundRow]) -> Result<()> {
    writeln!(w, "{BOUNDS_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.k,
            format_f64(r.snr_db),
            format_f64(r.sigma_n_sq),
            format_f64(r.crlb_nss),
            format_f64(r.crlb_ass),
            r.crlb_ass_valid
        )?;
    }
    Ok(())
}

/// Final MSE of one curve next to the bounds for its `(K, SNR)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub solver: Solver,
    pub k: usize,
    pub snr_db: f64,
    pub epsilon: Option<f64>,
    pub final_mse: f64,
    pub crlb_nss: f64,
    pub crlb_ass: f64,
    pub crlb_ass_valid: bool,
}

fn key_label(k: usize, snr_db: f64) -> String {
    format!("(k={k}, snr_db={snr_db})")
}

/// Joins curves with bounds on `(K, SNR)`. Every curve key must have a bound.
pub fn compare_with_bounds(curves: &[MseCurve], bounds: &[BoundRow]) -> Result<Vec<ComparisonRow>> {
    let find = |k: usize, snr: f64| {
        bounds
            .iter()
            .find(|b| b.k == k && b.snr_db.to_bits() == snr.to_bits())
    };
    let mut missing: Vec<String> = curves
        .iter()
        .filter(|c| find(c.k, c.snr_db).is_none())
        .map(|c| key_label(c.k, c.snr_db))
        .collect();
    if !missing.is_empty() {
        missing.dedup();
        return Err(HarnessError::MissingKeys(missing));
    }
    Ok(curves
        .iter()
        .filter_map(|c| {
            let b = find(c.k, c.snr_db).expect("checked above");
            Some(ComparisonRow {
                solver: c.solver,
                k: c.k,
                snr_db: c.snr_db,
                epsilon: c.epsilon,
                final_mse: c.final_mse()?,
                crlb_nss: b.crlb_nss,
                crlb_ass: b.crlb_ass,
                crlb_ass_valid: b.crlb_ass_valid,
            })
        })
        .collect())
}

pub const COMPARISON_HEADER: &str =
    "solver,k,snr_db,epsilon,final_mse,crlb_nss,crlb_ass,crlb_ass_valid";

pub fn write_comparison<W: Write>(w: &mut W, rows: &[ComparisonRow]) -> Result<()> {
    writeln!(w, "{COMPARISON_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.solver,
            r.k,
            format_f64(r.snr_db),
            format_f64(r.epsilon.unwrap_or(f64::NAN)),
            format_f64(r.final_mse),
            format_f64(r.crlb_nss),
            format_f64(r.crlb_ass),
            r.crlb_ass_valid
        )?;
    }
    Ok(())
}
