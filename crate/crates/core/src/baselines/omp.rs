//! Orthogonal matching pursuit.
//!
//! Each round correlates the residual with every column, adds the best atom,
//! refits by least squares on the selected support and updates the residual.
//! The refit uses an incrementally grown QR factorization (modified
//! Gram-Schmidt with one reorthogonalization pass).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, invalid, Result};
use crate::linalg::{axpy, dot, norm};
use crate::model::{MeasurementSet, SensingEnsemble};

/// Columns whose orthogonalized norm drops below this fraction of their
/// original norm are treated as linearly dependent on the support.
const DEPENDENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmpConfig {
    k_target: usize,
    residual_tol: f64,
}

impl OmpConfig {
    pub fn new(k_target: usize, residual_tol: f64) -> Result<Self> {
        if k_target == 0 {
            return Err(invalid("k_target must be at least 1"));
        }
        if residual_tol.is_nan() || residual_tol < 0.0 {
            return Err(invalid("residual_tol must be non-negative"));
        }
        Ok(Self {
            k_target,
            residual_tol,
        })
    }

    pub fn k_target(&self) -> usize {
        self.k_target
    }

    pub fn residual_tol(&self) -> f64 {
        self.residual_tol
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmpSolution {
    pub estimate: Vec<f64>,
    /// Selected atoms in selection order.
    pub support: Vec<usize>,
    pub residual: Vec<f64>,
    /// Set when a selected column was (numerically) dependent on the support.
    pub rank_deficient: bool,
}

impl OmpSolution {
    pub fn residual_norm(&self) -> f64 {
        norm(&self.residual)
    }
}

pub fn omp_solve(
    ensemble: &SensingEnsemble,
    y: &MeasurementSet,
    cfg: &OmpConfig,
) -> Result<OmpSolution> {
    let x = ensemble.matrix();
    let (m, n) = (x.rows(), x.cols());
    let y = y.observations();
    check_len(m, y.len())?;
    if cfg.k_target > m.min(n) {
        return Err(invalid("k_target exceeds min(M, N)"));
    }
    if !y.iter().all(|v| v.is_finite()) {
        return Err(invalid("observations must be finite"));
    }

    let columns: Vec<Vec<f64>> = (0..n).map(|c| x.column(c)).collect();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(cfg.k_target);
    // r[j] holds column j of R (length j + 1)
    let mut r: Vec<Vec<f64>> = Vec::with_capacity(cfg.k_target);
    let mut support = Vec::with_capacity(cfg.k_target);
    let mut selected = vec![false; n];
    let mut residual = y.to_vec();
    let mut rank_deficient = false;

    while support.len() < cfg.k_target && norm(&residual) > cfg.residual_tol {
        let mut best = None;
        let mut best_corr = 0.0;
        for (c, col) in columns.iter().enumerate() {
            if selected[c] {
                continue;
            }
            let corr = libm::fabs(dot(col, &residual));
            if corr > best_corr {
                best_corr = corr;
                best = Some(c);
            }
        }
        let Some(atom) = best else { break };

        let col = &columns[atom];
        let mut v = col.clone();
        let mut coeffs = vec![0.0; q.len() + 1];
        for _ in 0..2 {
            for (j, qj) in q.iter().enumerate() {
                let p = dot(qj, &v);
                coeffs[j] += p;
                axpy(-p, qj, &mut v);
            }
        }
        let vn = norm(&v);
        if vn <= DEPENDENCE_TOL * norm(col) {
            rank_deficient = true;
            break;
        }
        for vi in v.iter_mut() {
            *vi /= vn;
        }
        coeffs[q.len()] = vn;
        selected[atom] = true;
        support.push(atom);
        r.push(coeffs);

        // residual = y − Q Qᵀ y, recomputed from y to avoid drift
        q.push(v);
        residual.copy_from_slice(y);
        for _ in 0..2 {
            for qj in &q {
                let p = dot(qj, &residual);
                axpy(-p, qj, &mut residual);
            }
        }
    }

    // back substitution on R c = Qᵀ y
    let k = support.len();
    let qty: Vec<f64> = q.iter().map(|qj| dot(qj, y)).collect();
    let mut c = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = qty[i];
        for j in i + 1..k {
            s -= r[j][i] * c[j];
        }
        c[i] = s / r[i][i];
    }
    let mut estimate = vec![0.0; n];
    for (&atom, &ci) in support.iter().zip(&c) {
        estimate[atom] = ci;
    }

    Ok(OmpSolution {
        estimate,
        support,
        residual,
        rank_deficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::model::NoiseModel;

    fn obs(v: Vec<f64>) -> MeasurementSet {
        MeasurementSet::new(v, NoiseModel::noiseless())
    }

    #[test]
    fn single_atom_recovered() {
        let x = Matrix::from_row_major(
            3,
            4,
            vec![1.0, 0.2, -0.5, 0.0, 0.3, 1.0, 0.1, 0.7, -0.2, 0.4, 1.0, 0.3],
        )
        .unwrap();
        let ens = SensingEnsemble::from_matrix(x.clone(), 1.0).unwrap();
        let h = [0.0, 0.0, -1.5, 0.0];
        let y = x.mul_vec(&h).unwrap();
        let sol = omp_solve(&ens, &obs(y), &OmpConfig::new(1, 0.0).unwrap()).unwrap();
        assert_eq!(sol.support, vec![2]);
        assert!((sol.estimate[2] + 1.5).abs() < 1e-14);
        assert!(sol.residual_norm() < 1e-14);
        assert!(!sol.rank_deficient);
    }

    #[test]
    fn zero_observation_stops_immediately() {
        let ens = SensingEnsemble::from_matrix(Matrix::identity(3), 1.0).unwrap();
        let sol = omp_solve(&ens, &obs(vec![0.0; 3]), &OmpConfig::new(2, 0.0).unwrap()).unwrap();
        assert!(sol.support.is_empty());
        assert!(sol.estimate.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dependent_columns_stay_finite() {
        // column 2 = column 0 + column 1
        let x = Matrix::from_row_major(
            3,
            3,
            vec![1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0],
        )
        .unwrap();
        let ens = SensingEnsemble::from_matrix(
            Matrix::from_row_major(3, 3, {
                let mut d = x.as_slice().to_vec();
                d[8] = 1e-100;
                d
            })
            .unwrap(),
            1.0,
        )
        .unwrap();
        let sol = omp_solve(&ens, &obs(vec![1.0, 2.0, 1.0]), &OmpConfig::new(3, 0.0).unwrap())
            .unwrap();
        assert_eq!(&sol.support[..2], &[2, 0]);
        assert!(sol.estimate.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn config_validation() {
        assert!(OmpConfig::new(0, 0.0).is_err());
        assert!(OmpConfig::new(1, -1.0).is_err());
        let ens = SensingEnsemble::from_matrix(Matrix::identity(2), 1.0).unwrap();
        let cfg = OmpConfig::new(3, 0.0).unwrap();
        assert!(omp_solve(&ens, &obs(vec![1.0, 1.0]), &cfg).is_err());
    }
}
