//! Experiment configuration.
//!
//! The file format is flat `key = value` text, one pair per line. Lists are
//! comma separated, `#` starts a comment and unknown keys are rejected.
//!
//! ```text
//! n_dim = 40
//! m_meas = 20
//! k_list = 2, 6, 10
//! snr_list = 0, 4, 8, 12
//! epsilon_list = 2000
//! trials = 100
//! seed = 1
//! solvers = rza-nlmf, omp, bpdn
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rzasense_core::filters::FilterParams;

use crate::error::{HarnessError, Result};

/// Recovery method evaluated by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Solver {
    RzaNlmf,
    Nlmf,
    Omp,
    Bpdn,
}

impl Solver {
    pub const ALL: [Solver; 4] = [Solver::RzaNlmf, Solver::Nlmf, Solver::Omp, Solver::Bpdn];

    pub fn name(self) -> &'static str {
        match self {
            Solver::RzaNlmf => "rza-nlmf",
            Solver::Nlmf => "nlmf",
            Solver::Omp => "omp",
            Solver::Bpdn => "bpdn",
        }
    }

    /// Adaptive solvers produce a per-iteration trace; batch solvers a single value.
    pub fn is_adaptive(self) -> bool {
        matches!(self, Solver::RzaNlmf | Solver::Nlmf)
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rza-nlmf" | "rza_nlmf" | "rzanlmf" => Ok(Solver::RzaNlmf),
            "nlmf" => Ok(Solver::Nlmf),
            "omp" => Ok(Solver::Omp),
            "bpdn" => Ok(Solver::Bpdn),
            other => Err(format!("unknown solver `{other}`")),
        }
    }
}

/// Parses a comma-separated solver list.
pub fn parse_solvers(s: &str) -> std::result::Result<Vec<Solver>, String> {
    let solvers = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if solvers.is_empty() {
        return Err("solver list is empty".into());
    }
    Ok(solvers)
}

/// A declarative Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_dim: usize,
    pub m_meas: usize,
    pub k_list: Vec<usize>,
    pub snr_list: Vec<f64>,
    pub epsilon_list: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub solvers: Vec<Solver>,
    pub mu_iss: f64,
    pub lambda: f64,
    /// Explicit attractor gain; `None` uses `μ_iss · λ · ε`.
    pub rho: Option<f64>,
    pub zeta: f64,
    pub n_max: u64,
    /// Sensing-entry variance σ².
    pub sigma_sq: f64,
    /// BPDN regularization; `None` uses `σ_n √(2 ln N)`.
    pub bpdn_lambda: Option<f64>,
    pub bpdn_max_iters: usize,
    /// Keep every `decimate`-th iteration in CSV output; 1 keeps all.
    pub decimate: u64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    /// N = 40, M = 20 with the reference filter settings and 100 trials.
    fn default() -> Self {
        Self {
            n_dim: 40,
            m_meas: 20,
            k_list: vec![2, 6, 10],
            snr_list: vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0],
            epsilon_list: vec![2000.0],
            trials: 100,
            seed: 1,
            solvers: Solver::ALL.to_vec(),
            mu_iss: 1.5,
            lambda: 5e-8,
            rho: None,
            zeta: FilterParams::DEFAULT_ZETA,
            n_max: FilterParams::DEFAULT_N_MAX,
            sigma_sq: 1.0,
            bpdn_lambda: None,
            bpdn_max_iters: 10_000,
            decimate: 50,
            out: None,
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| HarnessError::Config {
        line,
        msg: format!("bad value `{}` for `{key}`", v.trim()),
    })
}

fn parse_list<T: FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| parse_value(line, key, t))
        .collect()
}

impl ExperimentConfig {
    /// Parses a config file. Keys not present keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(HarnessError::Config {
                    line,
                    msg: format!("expected `key = value`, got `{content}`"),
                });
            };
            let key = key.trim();
            match key {
                "n_dim" => cfg.n_dim = parse_value(line, key, value)?,
                "m_meas" => cfg.m_meas = parse_value(line, key, value)?,
                "k_list" => cfg.k_list = parse_list(line, key, value)?,
                "snr_list" => cfg.snr_list = parse_list(line, key, value)?,
                "epsilon_list" => cfg.epsilon_list = parse_list(line, key, value)?,
                "trials" => cfg.trials = parse_value(line, key, value)?,
                "seed" => cfg.seed = parse_value(line, key, value)?,
                "solvers" => {
                    cfg.solvers = parse_solvers(value)
                        .map_err(|msg| HarnessError::Config { line, msg })?
                }
                "mu_iss" => cfg.mu_iss = parse_value(line, key, value)?,
                "lambda" => cfg.lambda = parse_value(line, key, value)?,
                "rho" => cfg.rho = Some(parse_value(line, key, value)?),
                "zeta" => cfg.zeta = parse_value(line, key, value)?,
                "n_max" => cfg.n_max = parse_value(line, key, value)?,
                "sigma_sq" => cfg.sigma_sq = parse_value(line, key, value)?,
                "bpdn_lambda" => cfg.bpdn_lambda = Some(parse_value(line, key, value)?),
                "bpdn_max_iters" => cfg.bpdn_max_iters = parse_value(line, key, value)?,
                "decimate" => cfg.decimate = parse_value(line, key, value)?,
                "out" => cfg.out = Some(PathBuf::from(value.trim())),
                _ => {
                    return Err(HarnessError::Config {
                        line,
                        msg: format!("unknown key `{key}`"),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::InvalidConfig(m.to_string()));
        if self.n_dim == 0 || self.m_meas == 0 {
            return bad("n_dim and m_meas must be positive");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.k_list.is_empty() || self.snr_list.is_empty() || self.epsilon_list.is_empty() {
            return bad("k_list, snr_list and epsilon_list must be non-empty");
        }
        if self.solvers.is_empty() {
            return bad("solvers must be non-empty");
        }
        if let Some(&k) = self.k_list.iter().find(|&&k| k == 0 || k > self.n_dim) {
            return bad(&format!("sparsity {k} outside 1..={}", self.n_dim));
        }
        if self.solvers.contains(&Solver::Omp) {
            if let Some(&k) = self.k_list.iter().find(|&&k| k > self.m_meas) {
                return bad(&format!("omp needs k <= m_meas, got {k}"));
            }
        }
        if self.snr_list.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return bad("snr values must be numbers (inf allowed for noiseless)");
        }
        if !(self.sigma_sq > 0.0 && self.sigma_sq.is_finite()) {
            return bad("sigma_sq must be positive");
        }
        if self.decimate == 0 {
            return bad("decimate must be at least 1");
        }
        if self.bpdn_max_iters == 0 {
            return bad("bpdn_max_iters must be at least 1");
        }
        if let Some(l) = self.bpdn_lambda {
            if !(l >= 0.0 && l.is_finite()) {
                return bad("bpdn_lambda must be non-negative");
            }
        }
        for &eps in &self.epsilon_list {
            self.filter_params(eps)?;
        }
        Ok(())
    }

    /// Filter settings for one reweighted factor.
    pub fn filter_params(&self, epsilon: f64) -> Result<FilterParams> {
        let mut p = FilterParams::new(self.mu_iss, self.lambda, epsilon)?
            .with_zeta(self.zeta)?
            .with_n_max(self.n_max)?;
        if let Some(rho) = self.rho {
            p = p.with_rho(rho)?;
        }
        Ok(p)
    }
}
