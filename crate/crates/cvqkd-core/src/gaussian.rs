//! Gaussian-state linear algebra in shot-noise units.
//!
//! Covariance matrices use the quadrature ordering `(x1, p1, x2, p2, ...)`
//! and the vacuum normalization `Var(x) = Var(p) = 1` (SNU). The symplectic
//! form is built for that ordering and is the single convention used by the
//! whole crate. All states are zero-mean; displacements never appear.

use nalgebra::DMatrix;
use thiserror::Error;

/// Tolerance below 1 inside which symplectic/diagonal values are treated as
/// floating-point noise around purity and clamped up to 1.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Maximum tolerated asymmetry `|G - G^T|` entrywise.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GaussianError {
    #[error("matrix dimension {0} is not 2*n_modes")]
    OddDimension(usize),
    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:.3e})")]
    NotSymmetric { max_asymmetry: f64 },
    #[error("unphysical covariance: diagonal entry {value} below vacuum at index {index}")]
    DiagonalBelowVacuum { index: usize, value: f64 },
    #[error("unphysical covariance: smallest symplectic eigenvalue {0} < 1")]
    BelowVacuum(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0})")]
    NotPositiveSemidefinite(f64),
    #[error("EPR variance {0} must be >= 1")]
    InvalidEprVariance(f64),
    #[error("thermal variance {0} must be >= 1")]
    InvalidThermalVariance(f64),
    #[error("beamsplitter transmittance {0} outside [0, 1]")]
    InvalidTransmittance(f64),
    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },
    #[error("beamsplitter modes must be distinct (got {0})")]
    DuplicateMode(usize),
    #[error("conditioning requires at least 2 modes, got {0}")]
    TooFewModes(usize),
    #[error("entropy argument {0} below 1")]
    EntropyDomain(f64),
}

/// Validated 2n x 2n covariance matrix of an n-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    m: DMatrix<f64>,
}

/// Symplectic eigenvalues, sorted descending, each >= 1 after clamping.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpectrum {
    eigenvalues: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues[0]
    }
}

/// Symplectic form for `n` modes in (x1, p1, ...) ordering.
fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut o = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        o[(2 * i, 2 * i + 1)] = 1.0;
        o[(2 * i + 1, 2 * i)] = -1.0;
    }
    o
}

/// Moduli of the eigenvalues of `i Omega G`, deduplicated into the n
/// symplectic eigenvalues. No physicality clamp is applied here.
///
/// Computed through the symmetric route: with S = G^(1/2), the matrix
/// K = S Omega S is real antisymmetric with eigenvalues +-(i nu), so its
/// singular values are the symplectic eigenvalues, each twice. Unsymmetric
/// Schur iterations on Omega*G itself stall exactly on these paired
/// imaginary spectra; symmetric EVD + SVD do not.
fn raw_symplectic_eigenvalues(m: &DMatrix<f64>, n_modes: usize) -> Vec<f64> {
    let eig = m.clone().symmetric_eigen();
    let sqrt_vals = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let s = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.transpose();
    let k = &s * symplectic_form(n_modes) * &s;
    let mut svs: Vec<f64> = k.svd(false, false).singular_values.iter().copied().collect();
    svs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    svs.into_iter().step_by(2).take(n_modes).collect()
}

/// Smallest eigenvalue of the matrix itself (not symplectic); negative
/// beyond tolerance means the matrix is not a covariance matrix at all.
fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

impl CovarianceMatrix {
    /// Validates symmetry, vacuum-dominated diagonal and the uncertainty
    /// relation (all symplectic eigenvalues >= 1 within [`PHYSICALITY_TOL`]).
    pub fn new(m: DMatrix<f64>) -> Result<Self, GaussianError> {
        let dim = m.nrows();
        if dim == 0 || dim % 2 != 0 || m.ncols() != dim {
            return Err(GaussianError::OddDimension(dim));
        }
        let n_modes = dim / 2;
        let mut max_asym = 0.0f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                max_asym = max_asym.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        if max_asym > SYMMETRY_TOL {
            return Err(GaussianError::NotSymmetric {
                max_asymmetry: max_asym,
            });
        }
        for i in 0..dim {
            if m[(i, i)] < 1.0 - PHYSICALITY_TOL {
                return Err(GaussianError::DiagonalBelowVacuum {
                    index: i,
                    value: m[(i, i)],
                });
            }
        }
        let min_eig = min_symmetric_eigenvalue(&m);
        if min_eig < -PHYSICALITY_TOL {
            return Err(GaussianError::NotPositiveSemidefinite(min_eig));
        }
        let nus = raw_symplectic_eigenvalues(&m, n_modes);
        if let Some(&min) = nus.last() {
            if min < 1.0 - PHYSICALITY_TOL {
                return Err(GaussianError::BelowVacuum(min));
            }
        }
        Ok(Self { n_modes, m })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Vacuum state of `n` modes (identity matrix).
    pub fn vacuum(n: usize) -> Self {
        Self {
            n_modes: n,
            m: DMatrix::identity(2 * n, 2 * n),
        }
    }

    /// Single-mode thermal state of quadrature variance `nu >= 1`.
    pub fn thermal(nu: f64) -> Result<Self, GaussianError> {
        if !(nu >= 1.0 - PHYSICALITY_TOL) {
            return Err(GaussianError::InvalidThermalVariance(nu));
        }
        let nu = nu.max(1.0);
        Ok(Self {
            n_modes: 1,
            m: DMatrix::from_diagonal_element(2, 2, nu),
        })
    }

    /// Tensor product with another state: block direct sum of the matrices.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (a, b) = (2 * self.n_modes, 2 * other.n_modes);
        let mut m = DMatrix::zeros(a + b, a + b);
        m.view_mut((0, 0), (a, a)).copy_from(&self.m);
        m.view_mut((a, a), (b, b)).copy_from(&other.m);
        Self {
            n_modes: self.n_modes + other.n_modes,
            m,
        }
    }

    /// 2x2 diagonal block of one mode.
    pub fn mode_block(&self, mode: usize) -> Result<DMatrix<f64>, GaussianError> {
        if mode >= self.n_modes {
            return Err(GaussianError::ModeOutOfRange {
                index: mode,
                n_modes: self.n_modes,
            });
        }
        Ok(self.m.view((2 * mode, 2 * mode), (2, 2)).into_owned())
    }
}

/// Two-mode squeezed (EPR) state of quadrature variance `v >= 1`.
///
/// Diagonal blocks are `v I2`; off-diagonal blocks are
/// `sqrt(v^2 - 1) diag(1, -1)`. The state is pure for every `v`.
pub fn epr_covariance(v: f64) -> Result<CovarianceMatrix, GaussianError> {
    if !(v >= 1.0 - PHYSICALITY_TOL) {
        return Err(GaussianError::InvalidEprVariance(v));
    }
    let v = v.max(1.0);
    let c = (v * v - 1.0).max(0.0).sqrt();
    let mut m = DMatrix::identity(4, 4) * v;
    m[(0, 2)] = c;
    m[(2, 0)] = c;
    m[(1, 3)] = -c;
    m[(3, 1)] = -c;
    CovarianceMatrix::new(m)
}

/// Applies a beamsplitter of transmittance `tau` to modes `(mode_a, mode_b)`.
///
/// The symplectic acts per quadrature as
/// `a' = sqrt(tau) a + sqrt(1-tau) b`, `b' = -sqrt(1-tau) a + sqrt(tau) b`,
/// so `tau = 0` swaps the modes up to a sign on the reflected arm (the
/// covariance picks up no sign on diagonal blocks, only on correlations).
pub fn apply_beamsplitter(
    g: &CovarianceMatrix,
    mode_a: usize,
    mode_b: usize,
    tau: f64,
) -> Result<CovarianceMatrix, GaussianError> {
    let n = g.n_modes();
    for &m in &[mode_a, mode_b] {
        if m >= n {
            return Err(GaussianError::ModeOutOfRange {
                index: m,
                n_modes: n,
            });
        }
    }
    if mode_a == mode_b {
        return Err(GaussianError::DuplicateMode(mode_a));
    }
    if !(0.0..=1.0).contains(&tau) {
        return Err(GaussianError::InvalidTransmittance(tau));
    }
    let (t, r) = (tau.sqrt(), (1.0 - tau).sqrt());
    let mut s = DMatrix::identity(2 * n, 2 * n);
    for q in 0..2 {
        let (ia, ib) = (2 * mode_a + q, 2 * mode_b + q);
        s[(ia, ia)] = t;
        s[(ia, ib)] = r;
        s[(ib, ia)] = -r;
        s[(ib, ib)] = t;
    }
    let m = &s * g.matrix() * s.transpose();
    // Symmetrize away multiplication round-off before re-validating.
    let sym = (&m + m.transpose()) * 0.5;
    CovarianceMatrix::new(sym)
}

/// Conditions on an ideal heterodyne measurement of mode `measured` and
/// returns the covariance of the remaining modes.
///
/// This is the Schur complement `G_R - G_C (G_M + I2)^-1 G_C^T`; for Gaussian
/// states it does not depend on the measurement outcome. `G_M + I2` is
/// invertible for any physical state, so inversion failure is a programming
/// error rather than a runtime condition.
pub fn heterodyne_condition(
    g: &CovarianceMatrix,
    measured: usize,
) -> Result<CovarianceMatrix, GaussianError> {
    let n = g.n_modes();
    if n < 2 {
        return Err(GaussianError::TooFewModes(n));
    }
    if measured >= n {
        return Err(GaussianError::ModeOutOfRange {
            index: measured,
            n_modes: n,
        });
    }
    let keep: Vec<usize> = (0..2 * n)
        .filter(|i| i / 2 != measured)
        .collect();
    let meas = [2 * measured, 2 * measured + 1];
    let m = g.matrix();
    let mut g_r = DMatrix::zeros(keep.len(), keep.len());
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in keep.iter().enumerate() {
            g_r[(a, b)] = m[(i, j)];
        }
    }
    let mut g_c = DMatrix::zeros(keep.len(), 2);
    for (a, &i) in keep.iter().enumerate() {
        for (b, &j) in meas.iter().enumerate() {
            g_c[(a, b)] = m[(i, j)];
        }
    }
    let mut g_m = DMatrix::zeros(2, 2);
    for (a, &i) in meas.iter().enumerate() {
        for (b, &j) in meas.iter().enumerate() {
            g_m[(a, b)] = m[(i, j)];
        }
    }
    let inv = (g_m + DMatrix::identity(2, 2))
        .try_inverse()
        .expect("G_M + I is positive definite for physical states");
    let cond = &g_r - &g_c * inv * g_c.transpose();
    let sym = (&cond + cond.transpose()) * 0.5;
    CovarianceMatrix::new(sym)
}

/// Symplectic eigenvalues of a validated covariance matrix, descending,
/// clamped up to 1 inside the physicality band.
pub fn symplectic_eigenvalues(g: &CovarianceMatrix) -> SymplecticSpectrum {
    let eigenvalues = raw_symplectic_eigenvalues(g.matrix(), g.n_modes())
        .into_iter()
        .map(|nu| nu.max(1.0))
        .collect();
    SymplecticSpectrum { eigenvalues }
}

/// Thermal-state entropy kernel, in bits:
/// `g(nu) = ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2)`.
pub fn g_entropy(nu: f64) -> Result<f64, GaussianError> {
    if nu < 1.0 - PHYSICALITY_TOL {
        return Err(GaussianError::EntropyDomain(nu));
    }
    let nu = nu.max(1.0);
    let a = (nu + 1.0) / 2.0;
    let b = (nu - 1.0) / 2.0;
    // b log2(b) -> 0 as b -> 0.
    let b_term = if b > 0.0 { b * b.log2() } else { 0.0 };
    Ok(a * a.log2() - b_term)
}

/// Von Neumann entropy in bits: sum of `g_entropy` over the symplectic
/// spectrum. Zero exactly for pure states.
pub fn von_neumann_entropy(g: &CovarianceMatrix) -> f64 {
    symplectic_eigenvalues(g)
        .eigenvalues()
        .iter()
        .map(|&nu| g_entropy(nu).expect("clamped spectrum is in domain"))
        .sum()
}
