//! Seeded Monte Carlo runner.
//!
//! Trial `t` of every configuration point draws its signal, matrix and noise
//! from `TrialStreams::new(seed, t)`, so all points of a sweep share the same
//! random draws trial by trial. Trials run on a rayon pool and are reduced in
//! trial order, which makes results independent of the worker count.

use std::fs::File;
use std::io::BufWriter;

use rayon::prelude::*;
use rzasense_core::baselines::{bpdn_solve, omp_solve, BpdnConfig, OmpConfig};
use rzasense_core::filters::{run_adaptive, FilterKind};
use rzasense_core::linalg::dist_sq;
use rzasense_core::model::{
    generate_sensing_matrix, generate_sparse_signal, measure, NoiseModel, TrialStreams,
};
use rzasense_core::Error as CoreError;

use crate::config::{ExperimentConfig, Solver};
use crate::error::{HarnessError, Result};
use crate::output::write_csv;

/// One cell of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigPoint {
    pub solver: Solver,
    pub k: usize,
    pub snr_db: f64,
    /// Reweighted factor; `None` for batch solvers.
    pub epsilon: Option<f64>,
}

/// Result of a single trial.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    /// `‖h − h̃(n)‖²` for `n = 0..=n_final`.
    Trace(Vec<f64>),
    /// Final squared error of a batch solver.
    Final(f64),
    /// The adaptive filter diverged at this iteration.
    Failed { iteration: u64 },
}

/// Averaged MSE for one configuration point.
#[derive(Debug, Clone, PartialEq)]
pub struct MseCurve {
    pub solver: Solver,
    pub k: usize,
    pub snr_db: f64,
    pub epsilon: Option<f64>,
    /// Trials requested.
    pub trials: u64,
    /// Trials excluded because the filter diverged.
    pub failed: u64,
    pub seed: u64,
    /// Iteration index per entry; `-1` marks the final value of a batch solver.
    pub iterations: Vec<i64>,
    pub mse: Vec<f64>,
}

impl MseCurve {
    /// Last averaged value (the batch result for OMP/BPDN).
    pub fn final_mse(&self) -> Option<f64> {
        self.mse.last().copied()
    }

    pub fn point(&self) -> ConfigPoint {
        ConfigPoint {
            solver: self.solver,
            k: self.k,
            snr_db: self.snr_db,
            epsilon: self.epsilon,
        }
    }
}

/// Runs one trial of one point.
pub fn run_trial(cfg: &ExperimentConfig, point: &ConfigPoint, trial: u64) -> Result<TrialOutcome> {
    let streams = TrialStreams::new(cfg.seed, trial);
    let h = generate_sparse_signal(cfg.n_dim, point.k, &mut streams.signal())?;
    let x = generate_sensing_matrix(cfg.m_meas, cfg.n_dim, cfg.sigma_sq, &mut streams.matrix())?;
    let noise = if point.snr_db == f64::INFINITY {
        NoiseModel::noiseless()
    } else {
        NoiseModel::from_snr_db(point.snr_db, NoiseModel::UNIT_POWER)?
    };
    let y = measure(&h, &x, &noise, &mut streams.noise())?;

    let outcome = match point.solver {
        Solver::RzaNlmf | Solver::Nlmf => {
            let kind = if point.solver == Solver::Nlmf {
                FilterKind::Nlmf
            } else {
                FilterKind::RzaNlmf
            };
            let eps = point.epsilon.unwrap_or(cfg.epsilon_list[0]);
            let params = cfg.filter_params(eps)?;
            match run_adaptive(kind, &y, &x, &params, Some(&h)) {
                Ok(run) => TrialOutcome::Trace(run.mse),
                Err(CoreError::Diverged { iteration }) => TrialOutcome::Failed { iteration },
                Err(e) => return Err(e.into()),
            }
        }
        Solver::Omp => {
            let sol = omp_solve(&x, &y, &OmpConfig::new(point.k, 0.0)?)?;
            TrialOutcome::Final(dist_sq(h.coefficients(), &sol.estimate))
        }
        Solver::Bpdn => {
            let lambda = cfg.bpdn_lambda.unwrap_or_else(|| {
                noise.sigma_n() * (2.0 * (cfg.n_dim as f64).ln()).sqrt()
            });
            let bcfg = BpdnConfig::new(lambda, cfg.bpdn_max_iters, BpdnConfig::DEFAULT_TOLERANCE)?;
            let sol = bpdn_solve(&x, &y, &bcfg)?;
            TrialOutcome::Final(dist_sq(h.coefficients(), &sol.estimate))
        }
    };
    Ok(outcome)
}

/// Enumerates the sweep grid: solver × K × SNR × ε, with ε collapsed for batch solvers.
pub fn sweep_points(cfg: &ExperimentConfig) -> Vec<ConfigPoint> {
    let mut points = Vec::new();
    for &solver in &cfg.solvers {
        for &k in &cfg.k_list {
            for &snr_db in &cfg.snr_list {
                if solver.is_adaptive() {
                    for &eps in &cfg.epsilon_list {
                        points.push(ConfigPoint {
                            solver,
                            k,
                            snr_db,
                            epsilon: Some(eps),
                        });
                    }
                } else {
                    points.push(ConfigPoint {
                        solver,
                        k,
                        snr_db,
                        epsilon: None,
                    });
                }
            }
        }
    }
    points
}

/// Averages `cfg.trials` trials of one point. Must be called inside the pool
/// that should execute the trials.
pub fn run_point(cfg: &ExperimentConfig, point: &ConfigPoint) -> Result<MseCurve> {
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, point, t))
        .collect::<Result<_>>()?;

    let len = outcomes
        .iter()
        .map(|o| match o {
            TrialOutcome::Trace(t) => t.len(),
            TrialOutcome::Final(_) => 1,
            TrialOutcome::Failed { .. } => 0,
        })
        .max()
        .unwrap_or(0);
    let mut failed = 0u64;
    let mut used = 0u64;
    let mut sum = vec![0.0; len];
    let mut batch = false;
    for outcome in &outcomes {
        match outcome {
            TrialOutcome::Failed { .. } => failed += 1,
            TrialOutcome::Final(v) => {
                batch = true;
                accumulate(&mut sum, std::slice::from_ref(v));
                used += 1;
            }
            TrialOutcome::Trace(trace) => {
                accumulate(&mut sum, trace);
                used += 1;
            }
        }
    }
    let mse: Vec<f64> = if used == 0 {
        Vec::new()
    } else {
        sum.iter().map(|s| s / used as f64).collect()
    };
    let iterations = if batch {
        vec![-1; mse.len()]
    } else {
        (0..mse.len() as i64).collect()
    };
    Ok(MseCurve {
        solver: point.solver,
        k: point.k,
        snr_db: point.snr_db,
        epsilon: point.epsilon,
        trials: cfg.trials,
        failed,
        seed: cfg.seed,
        iterations,
        mse,
    })
}

/// Adds `trace` into `sum`, extending a shorter trace with its last value
/// (a filter that stopped early keeps its estimate).
fn accumulate(sum: &mut [f64], trace: &[f64]) {
    let Some(&last) = trace.last() else { return };
    for (i, s) in sum.iter_mut().enumerate() {
        *s += trace.get(i).copied().unwrap_or(last);
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Pool(e.to_string()))
}

/// Computes every curve of the sweep on `workers` threads.
pub fn sweep_curves(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<MseCurve>> {
    cfg.validate()?;
    let points = sweep_points(cfg);
    pool(workers)?.install(|| points.iter().map(|p| run_point(cfg, p)).collect())
}

/// Runs the sweep and writes the CSV to `cfg.out`. The output file is created
/// before any trial runs, so an unwritable path fails fast.
pub fn run_sweep(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<MseCurve>> {
    cfg.validate()?;
    let writer = match &cfg.out {
        Some(path) => Some(BufWriter::new(File::create(path).map_err(|source| {
            HarnessError::Output {
                path: path.clone(),
                source,
            }
        })?)),
        None => None,
    };
    let curves = sweep_curves(cfg, workers)?;
    if let Some(mut w) = writer {
        write_csv(&mut w, &curves, cfg.decimate)?;
    }
    Ok(curves)
}
