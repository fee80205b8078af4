//! Monte Carlo harness for `rzasense-core`: experiment configuration, a seeded
//! parallel trial runner, CSV output and the comparison against closed-form
//! bounds. The `rzasense` binary wraps these behind a CLI.

#![forbid(unsafe_code)]

pub mod bounds;
pub mod config;
mod error;
pub mod output;
pub mod runner;

pub use config::{ExperimentConfig, Solver};
pub use error::{HarnessError, Result};
pub use runner::{run_sweep, run_trial, sweep_curves, ConfigPoint, MseCurve, TrialOutcome};
