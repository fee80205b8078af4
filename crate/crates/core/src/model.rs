//! System model: K-sparse ground truth, Gaussian sensing ensembles and noisy
//! measurements `y = X h + z`.
//!
//! Every generator takes an explicit random source. [`TrialStreams`] derives
//! independent signal, matrix and noise streams from a `(root seed, trial)` pair
//! so any one component can be regenerated on its own.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{check_len, invalid, Error, Result};
use crate::linalg::{norm_sq, Matrix};

/// A K-sparse coefficient vector with its support.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    coefficients: Vec<f64>,
    support: Vec<usize>,
}

impl SparseSignal {
    /// Wraps a dense vector; the support is the set of nonzero entries.
    pub fn from_dense(coefficients: Vec<f64>) -> Self {
        let support = coefficients
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect();
        Self {
            coefficients,
            support,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_dense(vec![0.0; n])
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Sorted indices of the nonzero entries.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.coefficients)
    }
}

/// Draws a K-sparse signal of length `n`.
///
/// The support is uniform without replacement and the nonzero entries are
/// i.i.d. `N(0, 1/k)`, so `E‖h‖² = 1`.
pub fn generate_sparse_signal<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<SparseSignal> {
    if k == 0 || k > n {
        return Err(Error::InvalidSparsity { k, n });
    }
    let dist = Normal::new(0.0, libm::sqrt(1.0 / k as f64)).map_err(|_| invalid("k"))?;
    let mut support = index::sample(rng, n, k).into_vec();
    support.sort_unstable();
    let mut coefficients = vec![0.0; n];
    for &i in &support {
        // an exact zero would shrink the support
        let mut v = 0.0;
        while v == 0.0 {
            v = dist.sample(rng);
        }
        coefficients[i] = v;
    }
    Ok(SparseSignal {
        coefficients,
        support,
    })
}

/// Sensing matrix `X` (M×N) with i.i.d. `N(0, σ²)` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingEnsemble {
    matrix: Matrix,
    row_variance: f64,
}

impl SensingEnsemble {
    /// Wraps an explicit matrix. Rows must be nonzero and entries finite.
    pub fn from_matrix(matrix: Matrix, row_variance: f64) -> Result<Self> {
        if !(row_variance > 0.0 && row_variance.is_finite()) {
            return Err(invalid("row variance must be positive"));
        }
        if !matrix.is_finite() {
            return Err(invalid("sensing matrix has non-finite entries"));
        }
        if (0..matrix.rows()).any(|r| norm_sq(matrix.row(r)) == 0.0) {
            return Err(Error::DegenerateRow);
        }
        Ok(Self {
            matrix,
            row_variance,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Per-entry variance σ² used to draw the matrix.
    pub fn row_variance(&self) -> f64 {
        self.row_variance
    }

    pub fn m_rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_cols(&self) -> usize {
        self.matrix.cols()
    }

    pub fn row(&self, m: usize) -> &[f64] {
        self.matrix.row(m)
    }
}

pub fn generate_sensing_matrix<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    sigma_sq: f64,
    rng: &mut R,
) -> Result<SensingEnsemble> {
    if m == 0 || n == 0 {
        return Err(invalid("sensing matrix dimensions must be positive"));
    }
    if !(sigma_sq > 0.0 && sigma_sq.is_finite()) {
        return Err(invalid("entry variance must be positive"));
    }
    let dist = Normal::new(0.0, libm::sqrt(sigma_sq)).map_err(|_| invalid("sigma_sq"))?;
    let mut matrix = Matrix::zeros(m, n);
    for r in 0..m {
        let row = matrix.row_mut(r);
        loop {
            for v in row.iter_mut() {
                *v = dist.sample(rng);
            }
            if norm_sq(row) > 0.0 {
                break;
            }
        }
    }
    Ok(SensingEnsemble {
        matrix,
        row_variance: sigma_sq,
    })
}

/// Converts an SNR in dB to a noise variance: `E_s · 10^(−snr_db/20)`.
///
/// `snr_db = +∞` maps to a noiseless channel.
pub fn snr_to_noise_variance(snr_db: f64, es: f64) -> f64 {
    es * libm::pow(10.0, -snr_db / 20.0)
}

/// Additive white Gaussian noise parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma_n_sq: f64,
    snr_db: f64,
    es: f64,
}

impl NoiseModel {
    pub const UNIT_POWER: f64 = 1.0;

    pub fn from_snr_db(snr_db: f64, es: f64) -> Result<Self> {
        if !(es > 0.0 && es.is_finite()) {
            return Err(invalid("signal power must be positive"));
        }
        if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
            return Err(invalid("snr_db must be a number below +inf dB"));
        }
        Ok(Self {
            sigma_n_sq: snr_to_noise_variance(snr_db, es),
            snr_db,
            es,
        })
    }

    /// Noise-free channel (`snr_db = +∞`).
    pub fn noiseless() -> Self {
        Self {
            sigma_n_sq: 0.0,
            snr_db: f64::INFINITY,
            es: Self::UNIT_POWER,
        }
    }

    pub fn sigma_n_sq(&self) -> f64 {
        self.sigma_n_sq
    }

    pub fn sigma_n(&self) -> f64 {
        libm::sqrt(self.sigma_n_sq)
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    pub fn es(&self) -> f64 {
        self.es
    }
}

/// Observations `y` together with the noise model that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    observations: Vec<f64>,
    noise: NoiseModel,
}

impl MeasurementSet {
    pub fn new(observations: Vec<f64>, noise: NoiseModel) -> Self {
        Self {
            observations,
            noise,
        }
    }

    pub fn observations(&self) -> &[f64] {
        &self.observations
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }
}

/// Computes `y = X h + z` with fresh `z ~ N(0, σ_n²)`.
///
/// One standard normal is drawn per row regardless of `σ_n²`, so runs that differ
/// only in SNR share the same underlying noise realization.
pub fn measure<R: Rng + ?Sized>(
    signal: &SparseSignal,
    ensemble: &SensingEnsemble,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<MeasurementSet> {
    check_len(ensemble.n_cols(), signal.len())?;
    let sigma_n = noise.sigma_n();
    let mut y = ensemble.matrix().mul_vec(signal.coefficients())?;
    for v in y.iter_mut() {
        let z: f64 = StandardNormal.sample(rng);
        *v += sigma_n * z;
    }
    Ok(MeasurementSet::new(y, *noise))
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic random streams for one Monte Carlo trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialStreams {
    seed: u64,
}

impl TrialStreams {
    const SIGNAL: u64 = 1;
    const MATRIX: u64 = 2;
    const NOISE: u64 = 3;

    /// Derives the trial seed from a root seed and the trial index.
    pub fn new(root_seed: u64, trial: u64) -> Self {
        Self {
            seed: mix64(mix64(root_seed) ^ trial),
        }
    }

    pub fn from_seed(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }

    pub fn signal(&self) -> ChaCha8Rng {
        self.stream(Self::SIGNAL)
    }

    pub fn matrix(&self) -> ChaCha8Rng {
        self.stream(Self::MATRIX)
    }

    pub fn noise(&self) -> ChaCha8Rng {
        self.stream(Self::NOISE)
    }
}
