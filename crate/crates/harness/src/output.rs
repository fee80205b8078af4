//! CSV output for MSE curves.
//!
//! Header: `solver,k,snr_db,epsilon,trial_count,seed,iteration,mse`. Floats are
//! written with 17 significant digits so they parse back bit-exactly. Batch
//! solvers use `iteration = -1` and `epsilon = NaN`.

use std::io::{BufRead, Write};

use crate::config::Solver;
use crate::error::{HarnessError, Result};
use crate::runner::MseCurve;

pub const CURVE_HEADER: &str = "solver,k,snr_db,epsilon,trial_count,seed,iteration,mse";

/// Formats with 17 significant digits (`inf`/`NaN` pass through).
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes curves, keeping iterations that are multiples of `decimate` plus the last one.
pub fn write_csv<W: Write>(w: &mut W, curves: &[MseCurve], decimate: u64) -> Result<()> {
    writeln!(w, "{CURVE_HEADER}")?;
    for c in curves {
        let eps = format_f64(c.epsilon.unwrap_or(f64::NAN));
        let snr = format_f64(c.snr_db);
        let last = c.mse.len().saturating_sub(1);
        for (i, (&it, &mse)) in c.iterations.iter().zip(&c.mse).enumerate() {
            let keep = it < 0 || decimate <= 1 || it as u64 % decimate == 0 || i == last;
            if !keep {
                continue;
            }
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                c.solver,
                c.k,
                snr,
                eps,
                c.trials,
                c.seed,
                it,
                format_f64(mse)
            )?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub solver: Solver,
    pub k: usize,
    pub snr_db: f64,
    pub epsilon: Option<f64>,
    pub trial_count: u64,
    pub seed: u64,
    pub iteration: i64,
    pub mse: f64,
}

pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<CurveRow>> {
    let mut rows = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let n = idx + 1;
        if n == 1 {
            if line.trim() != CURVE_HEADER {
                return Err(HarnessError::Csv {
                    line: n,
                    msg: format!("expected header `{CURVE_HEADER}`"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(HarnessError::Csv {
                line: n,
                msg: format!("expected 8 fields, found {}", fields.len()),
            });
        }
        let err = |what: &str| HarnessError::Csv {
            line: n,
            msg: format!("bad {what}"),
        };
        let epsilon: f64 = fields[3].parse().map_err(|_| err("epsilon"))?;
        rows.push(CurveRow {
            solver: fields[0].parse().map_err(|_| err("solver"))?,
            k: fields[1].parse().map_err(|_| err("k"))?,
            snr_db: fields[2].parse().map_err(|_| err("snr_db"))?,
            epsilon: (!epsilon.is_nan()).then_some(epsilon),
            trial_count: fields[4].parse().map_err(|_| err("trial_count"))?,
            seed: fields[5].parse().map_err(|_| err("seed"))?,
            iteration: fields[6].parse().map_err(|_| err("iteration"))?,
            mse: fields[7].parse().map_err(|_| err("mse"))?,
        });
    }
    Ok(rows)
}

/// Regroups rows into curves, preserving first-appearance order.
pub fn curves_from_rows(rows: &[CurveRow]) -> Vec<MseCurve> {
    let mut curves: Vec<MseCurve> = Vec::new();
    for r in rows {
        let same = |c: &MseCurve| {
            c.solver == r.solver
                && c.k == r.k
                && c.snr_db.to_bits() == r.snr_db.to_bits()
                && c.epsilon.map(f64::to_bits) == r.epsilon.map(f64::to_bits)
                && c.seed == r.seed
        };
        let curve = match curves.iter_mut().position(|c| same(c)) {
            Some(i) => &mut curves[i],
            None => {
                curves.push(MseCurve {
                    solver: r.solver,
                    k: r.k,
                    snr_db: r.snr_db,
                    epsilon: r.epsilon,
                    trials: r.trial_count,
                    failed: 0,
                    seed: r.seed,
                    iterations: Vec::new(),
                    mse: Vec::new(),
                });
                curves.last_mut().expect("just pushed")
            }
        };
        curve.iterations.push(r.iteration);
        curve.mse.push(r.mse);
    }
    curves
}

/// Header followed by the data lines sorted bytewise.
pub fn canonicalize(csv: &str) -> String {
    let mut lines = csv.lines();
    let header = lines.next().unwrap_or("");
    let mut body: Vec<&str> = lines.filter(|l| !l.is_empty()).collect();
    body.sort_unstable();
    let mut out = String::with_capacity(csv.len());
    out.push_str(header);
    out.push('\n');
    for l in body {
        out.push_str(l);
        out.push('\n');
    }
    out
}
