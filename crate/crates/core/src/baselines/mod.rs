//! Batch sparse recovery baselines.
//!
//! Both solvers are deterministic and allocate only their outputs and a few
//! work vectors.

mod bpdn;
mod omp;

pub use bpdn::{bpdn_objective, bpdn_solve, soft_threshold, BpdnConfig, BpdnSolution};
pub use omp::{omp_solve, OmpConfig, OmpSolution};
