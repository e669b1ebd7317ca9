//! Dense complex matrix algebra.
//!
//! Everything downstream (operator pairs, the almost-projection, the bound
//! checks) is expressed through [`ComplexMatrix`]. Eigendecompositions and
//! dense products are delegated to `nalgebra`; this module owns the
//! tolerances, ordering guarantees and error reporting.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{OmegaError, Result};

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative floor on the smallest eigenvalue for [`hpd_inverse`].
pub const PD_FLOOR: f64 = 1e-12;

/// Dense square-or-rectangular complex matrix in double precision.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { inner: DMatrix::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: DMatrix::identity(n, n) }
    }

    /// Diagonal matrix with real entries.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.inner[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(OmegaError::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if let Some(k) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(OmegaError::NonFinite { row: k / cols.max(1), col: k % cols.max(1) });
        }
        Ok(Self { inner: DMatrix::from_row_slice(rows, cols, entries) })
    }

    /// Builds a matrix from nested rows. All rows must share one length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(OmegaError::DimensionMismatch(format!(
                "row {bad} has {} entries, expected {n_cols}",
                rows[bad].len()
            )));
        }
        let flat: Vec<Complex64> = rows.iter().flatten().copied().collect();
        Self::from_row_major(n_rows, n_cols, &flat)
    }

    pub(crate) fn from_inner(inner: DMatrix<Complex64>) -> Self {
        Self { inner }
    }

    pub(crate) fn inner(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.inner[(row, col)] = value;
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.inner[(i, j)]);
            }
        }
        out
    }

    /// Nested row representation.
    pub fn to_rows(&self) -> Vec<Vec<Complex64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.inner[(i, j)]).collect())
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self { inner: self.inner.adjoint() }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(OmegaError::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Self { inner: &self.inner * &other.inner })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        Ok(Self { inner: &self.inner + &other.inner })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "subtract")?;
        Ok(Self { inner: &self.inner - &other.inner })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { inner: &self.inner * factor }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// `self + shift * I`.
    pub fn shift_diagonal(&self, shift: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(OmegaError::DimensionMismatch("diagonal shift of a non-square matrix".into()));
        }
        let mut out = self.clone();
        for i in 0..out.rows() {
            out.inner[(i, i)] += Complex64::new(shift, 0.0);
        }
        Ok(out)
    }

    /// Commutator `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Principal submatrix on the given index list, in list order.
    pub fn principal_submatrix(&self, indices: &[usize]) -> Self {
        let k = indices.len();
        Self { inner: DMatrix::from_fn(k, k, |i, j| self.inner[(indices[i], indices[j])]) }
    }

    /// Zeroes every row and column whose index is `>= keep`.
    pub fn mask_tail(&self, keep: usize) -> Self {
        let mut out = self.clone();
        for i in 0..out.rows() {
            for j in 0..out.cols() {
                if i >= keep || j >= keep {
                    out.inner[(i, j)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Relative Hermitian residual `‖m − mᴴ‖_F / ‖m‖_F` (0 for the zero matrix).
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let scale = self.frobenius_norm();
        if scale == 0.0 {
            return 0.0;
        }
        (&self.inner - self.inner.adjoint()).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() / scale
    }

    /// `(m + mᴴ) / 2`.
    pub fn symmetrized(&self) -> Self {
        Self { inner: (&self.inner + self.inner.adjoint()) * Complex64::new(0.5, 0.0) }
    }

    fn check_same_shape(&self, other: &Self, op: &str) -> Result<()> {
        if self.rows() != other.rows() || self.cols() != other.cols() {
            return Err(OmegaError::DimensionMismatch(format!(
                "cannot {op} {}x{} and {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(())
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V · diag(g(values)) · Vᴴ`.
    pub fn apply_function(&self, g: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = self.vectors.inner();
        let mut scaled = v.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(g(lam));
        }
        ComplexMatrix::from_inner(&scaled * v.adjoint())
    }
}

fn require_hermitian(m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(OmegaError::DimensionMismatch(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let residual = m.hermitian_residual();
    if residual > HERMITIAN_TOL {
        return Err(OmegaError::NonHermitianInput { residual, tolerance: HERMITIAN_TOL });
    }
    Ok(())
}

/// Full spectrum of a Hermitian matrix with orthonormal eigenvectors.
///
/// The input is symmetrized before decomposition, so round-off asymmetry
/// below [`HERMITIAN_TOL`] is tolerated.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    require_hermitian(m)?;
    let n = m.rows();
    if n == 0 {
        return Ok(HermitianEigen { values: Vec::new(), vectors: ComplexMatrix::zeros(0, 0) });
    }
    let sym = m.symmetrized().inner;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 200 * n.max(8))
        .ok_or(OmegaError::ConvergenceFailure)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(OmegaError::ConvergenceFailure);
    }
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors: ComplexMatrix::from_inner(vectors) })
}

/// Eigenvalues only, ascending. Cheaper than [`hermitian_eigen`].
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    require_hermitian(m)?;
    if m.rows() == 0 {
        return Ok(Vec::new());
    }
    let values: DVector<f64> = m.symmetrized().inner.symmetric_eigenvalues();
    let mut values: Vec<f64> = values.iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(OmegaError::ConvergenceFailure);
    }
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Largest singular value.
pub fn operator_norm(m: &ComplexMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    // mᴴm is Hermitian PSD; its top eigenvalue is σ_max².
    let gram = ComplexMatrix::from_inner(m.inner.adjoint() * &m.inner).symmetrized();
    let top = gram.inner.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max);
    top.max(0.0).sqrt()
}

/// Norm of a (numerically) Hermitian matrix as `max |eigenvalue|`.
///
/// Equals [`operator_norm`] for Hermitian input and costs one eigenvalue
/// sweep instead of a Gram product.
pub fn hermitian_norm(m: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|v| v.abs()).fold(0.0, f64::max))
}

/// Inverse of a Hermitian positive definite matrix.
pub fn hpd_inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(m)?;
    let top = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let floor = PD_FLOOR * top;
    let min = eig.values.first().copied().unwrap_or(1.0);
    if min <= floor || min <= 0.0 {
        return Err(OmegaError::NotPositiveDefinite { min_eigenvalue: min, floor });
    }
    Ok(eig.apply_function(|v| 1.0 / v).symmetrized())
}
