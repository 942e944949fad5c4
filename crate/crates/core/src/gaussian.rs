//! Dense symplectic linear algebra for N-mode Gaussian states.
//!
//! States are described by a real symmetric covariance matrix `Γ` and a mean
//! vector `R` over the quadratures, with the fixed interleaved ordering
//! `(x₁, p₁, x₂, p₂, …, x_N, p_N)` and vacuum variance normalized to 1
//! (`Γ_vac = I`). Gaussian unitaries act as symplectic matrices `S` with
//! `S Ω Sᵀ = Ω`.

use nalgebra::{DMatrix, DVector};

use crate::cluster::ClusterGraph;
use crate::error::{Error, Result};

/// Max-norm tolerance for covariance symmetry checks.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Tolerance on the minimum eigenvalue of `Γ + iΩ` (uncertainty relation).
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Max-norm tolerance for `SΩSᵀ = Ω` checks.
pub const SYMPLECTIC_TOL: f64 = 1e-10;

/// An N-mode Gaussian state: covariance matrix and first-moment vector.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    n_modes: usize,
    cov: DMatrix<f64>,
    mean: DVector<f64>,
}

impl GaussianState {
    /// Validates symmetry and physicality before accepting the pair.
    pub fn new(cov: DMatrix<f64>, mean: DVector<f64>) -> Result<Self> {
        if cov.nrows() != cov.ncols() || cov.nrows() == 0 || cov.nrows() % 2 != 0 {
            return Err(Error::invalid_argument(format!(
                "covariance must be square 2N x 2N, got {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        let n_modes = cov.nrows() / 2;
        if mean.len() != 2 * n_modes {
            return Err(Error::invalid_argument(format!(
                "mean length {} does not match covariance dimension {}",
                mean.len(),
                2 * n_modes
            )));
        }
        if !cov.iter().all(|v| v.is_finite()) || !mean.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid_argument("non-finite state entries"));
        }
        let asym = symmetry_defect(&cov);
        if asym > SYMMETRY_TOL {
            return Err(Error::invalid_state(format!(
                "covariance not symmetric (max |Γ - Γᵀ| = {asym:.3e})"
            )));
        }
        let min_eig = physicality_min_eigenvalue(&cov);
        if min_eig < -PHYSICALITY_TOL {
            return Err(Error::invalid_state(format!(
                "covariance violates Γ + iΩ ⪰ 0 (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self { n_modes, cov, mean })
    }

    /// Internal constructor for states produced by operations that preserve
    /// physicality by construction.
    pub(crate) fn from_parts_unchecked(cov: DMatrix<f64>, mean: DVector<f64>) -> Self {
        debug_assert_eq!(cov.nrows(), cov.ncols());
        debug_assert_eq!(cov.nrows(), mean.len());
        let n_modes = cov.nrows() / 2;
        Self { n_modes, cov, mean }
    }

    /// Vacuum: `Γ = I`, `R = 0`.
    pub fn vacuum(n_modes: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::invalid_argument("n_modes must be >= 1"));
        }
        Ok(Self {
            n_modes,
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes),
            mean: DVector::zeros(2 * n_modes),
        })
    }

    /// Product of x-displaced coherent states: `Γ = I`, every `⟨x̂ᵢ⟩ = amplitude`,
    /// every `⟨p̂ᵢ⟩ = 0`.
    pub fn coherent_x(n_modes: usize, amplitude: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(Error::invalid_argument("amplitude must be finite"));
        }
        let mut state = Self::vacuum(n_modes)?;
        for i in 0..n_modes {
            state.mean[2 * i] = amplitude;
        }
        Ok(state)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// `cov ← SΓSᵀ`, `mean ← SR`.
    pub fn apply_gate(&self, gate: &SymplecticGate) -> Result<GaussianState> {
        if gate.n_modes() != self.n_modes {
            return Err(Error::invalid_argument(format!(
                "gate acts on {} modes but state has {}",
                gate.n_modes(),
                self.n_modes
            )));
        }
        let s = gate.matrix();
        let cov = s * &self.cov * s.transpose();
        let mean = s * &self.mean;
        Ok(GaussianState::from_parts_unchecked(cov, mean))
    }

    /// Mixing step of a transmissivity-T loss channel:
    /// `cov ← T·Γ + (1−T)·I`, `mean ← √T·R`.
    pub fn loss_channel(&self, transmissivity: f64) -> Result<GaussianState> {
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(Error::invalid_argument(format!(
                "transmissivity must lie in [0, 1], got {transmissivity}"
            )));
        }
        let dim = 2 * self.n_modes;
        let mut cov = &self.cov * transmissivity;
        for i in 0..dim {
            cov[(i, i)] += 1.0 - transmissivity;
        }
        let mean = &self.mean * transmissivity.sqrt();
        Ok(GaussianState::from_parts_unchecked(cov, mean))
    }

    /// The x-x covariance sub-matrix and x-mean sub-vector, in mode order.
    pub fn x_block(&self) -> (DMatrix<f64>, DVector<f64>) {
        (x_block_of(&self.cov), x_part_of(&self.mean))
    }
}

/// Extracts the `⟨x̂ᵢx̂ⱼ⟩ − ⟨x̂ᵢ⟩⟨x̂ⱼ⟩` sub-matrix of a full 2N x 2N covariance.
pub(crate) fn x_block_of(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let n = cov.nrows() / 2;
    DMatrix::from_fn(n, n, |i, j| cov[(2 * i, 2 * j)])
}

/// Extracts the x-components of a full 2N quadrature vector.
pub(crate) fn x_part_of(mean: &DVector<f64>) -> DVector<f64> {
    let n = mean.len() / 2;
    DVector::from_fn(n, |i, _| mean[2 * i])
}

/// A Gaussian unitary in its symplectic representation.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticGate {
    matrix: DMatrix<f64>,
}

impl SymplecticGate {
    /// Validates `SΩSᵀ = Ω` before accepting an arbitrary matrix.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 || matrix.nrows() % 2 != 0 {
            return Err(Error::invalid_argument(format!(
                "gate matrix must be square 2N x 2N, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let defect = symplectic_defect(&matrix)?;
        if defect > SYMPLECTIC_TOL {
            return Err(Error::invalid_argument(format!(
                "matrix is not symplectic (max |SΩSᵀ - Ω| = {defect:.3e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        debug_assert!(
            symplectic_defect(&matrix).map(|d| d <= SYMPLECTIC_TOL).unwrap_or(false),
            "constructed gate is not symplectic"
        );
        Self { matrix }
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Gate composition: `self · rhs` (rhs acts first).
    pub fn compose(&self, rhs: &SymplecticGate) -> Result<SymplecticGate> {
        if self.n_modes() != rhs.n_modes() {
            return Err(Error::invalid_argument("gate dimension mismatch in composition"));
        }
        Ok(SymplecticGate::from_matrix_unchecked(&self.matrix * &rhs.matrix))
    }
}

/// The symplectic form Ω for the interleaved ordering: block-diagonal with
/// N blocks `[[0, 1], [-1, 0]]`.
pub fn symplectic_form(n_modes: usize) -> Result<DMatrix<f64>> {
    if n_modes == 0 {
        return Err(Error::invalid_argument("n_modes must be >= 1"));
    }
    let dim = 2 * n_modes;
    let mut omega = DMatrix::zeros(dim, dim);
    for i in 0..n_modes {
        omega[(2 * i, 2 * i + 1)] = 1.0;
        omega[(2 * i + 1, 2 * i)] = -1.0;
    }
    Ok(omega)
}

/// Mode-wise Fourier gate `F = ⊕ᵢ [[0, -1], [1, 0]]` (90° phase rotation).
pub fn fourier_matrix(n_modes: usize) -> Result<SymplecticGate> {
    if n_modes == 0 {
        return Err(Error::invalid_argument("n_modes must be >= 1"));
    }
    let dim = 2 * n_modes;
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..n_modes {
        m[(2 * i, 2 * i + 1)] = -1.0;
        m[(2 * i + 1, 2 * i)] = 1.0;
    }
    Ok(SymplecticGate::from_matrix_unchecked(m))
}

/// Mode-wise quadratic phase (shear) gate `⊕ᵢ [[1, 0], [dᵢ, 1]]`:
/// `pᵢ ← pᵢ + dᵢ·xᵢ`.
pub fn shear_matrix(coefficients: &[f64]) -> Result<SymplecticGate> {
    if coefficients.is_empty() {
        return Err(Error::invalid_argument("need at least one shear coefficient"));
    }
    if !coefficients.iter().all(|d| d.is_finite()) {
        return Err(Error::invalid_argument("non-finite shear coefficient"));
    }
    let dim = 2 * coefficients.len();
    let mut m = DMatrix::identity(dim, dim);
    for (i, d) in coefficients.iter().enumerate() {
        m[(2 * i + 1, 2 * i)] = *d;
    }
    Ok(SymplecticGate::from_matrix_unchecked(m))
}

/// The entangling gate of a cluster graph: identity plus, for every edge
/// `(i, j, ξ)`, the `pᵢ`-row/`xⱼ`-column and `pⱼ`-row/`xᵢ`-column entries set
/// to ξ (`pᵢ ← pᵢ + ξ·xⱼ`, symmetrically).
pub fn cz_matrix(graph: &ClusterGraph) -> SymplecticGate {
    let n = graph.n_modes();
    let dim = 2 * n;
    let mut m = DMatrix::identity(dim, dim);
    for edge in graph.edges() {
        // Graph indices are 1-based.
        let i = edge.i - 1;
        let j = edge.j - 1;
        m[(2 * i + 1, 2 * j)] = edge.strength;
        m[(2 * j + 1, 2 * i)] = edge.strength;
    }
    SymplecticGate::from_matrix_unchecked(m)
}

/// Maximum eigenvalue modulus of a real square matrix.
pub fn spectral_radius(matrix: &DMatrix<f64>) -> Result<f64> {
    if matrix.nrows() != matrix.ncols() {
        return Err(Error::invalid_argument(format!(
            "spectral radius needs a square matrix, got {}x{}",
            matrix.nrows(),
            matrix.ncols()
        )));
    }
    if !matrix.iter().all(|v| v.is_finite()) {
        return Err(Error::invalid_argument("non-finite matrix entries"));
    }
    if matrix.nrows() == 0 {
        return Err(Error::invalid_argument("empty matrix"));
    }
    let eigs = matrix.clone().complex_eigenvalues();
    Ok(eigs.iter().map(|e| e.norm()).fold(0.0, f64::max))
}

/// Max-norm of `Γ - Γᵀ`.
pub fn symmetry_defect(matrix: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..matrix.nrows() {
        for j in (i + 1)..matrix.ncols() {
            worst = worst.max((matrix[(i, j)] - matrix[(j, i)]).abs());
        }
    }
    worst
}

/// Max-norm of `SΩSᵀ - Ω`.
pub fn symplectic_defect(matrix: &DMatrix<f64>) -> Result<f64> {
    let omega = symplectic_form(matrix.nrows() / 2)?;
    let residual = matrix * &omega * matrix.transpose() - &omega;
    Ok(residual.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
}

/// Minimum eigenvalue of the Hermitian matrix `Γ + iΩ`, computed through its
/// real symmetric embedding `[[Γ, -Ω], [Ω, Γ]]` (same spectrum, doubled).
/// Nonnegative (up to tolerance) iff the covariance is physical.
pub fn physicality_min_eigenvalue(cov: &DMatrix<f64>) -> f64 {
    let dim = cov.nrows();
    let omega = symplectic_form(dim / 2).expect("even dimension");
    let mut embed = DMatrix::zeros(2 * dim, 2 * dim);
    embed.view_mut((0, 0), (dim, dim)).copy_from(cov);
    embed.view_mut((dim, dim), (dim, dim)).copy_from(cov);
    embed.view_mut((0, dim), (dim, dim)).copy_from(&(-&omega));
    embed.view_mut((dim, 0), (dim, dim)).copy_from(&omega);
    // Symmetrize against floating-point drift before the eigensolve.
    let sym = (&embed + embed.transpose()) * 0.5;
    sym.symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}
