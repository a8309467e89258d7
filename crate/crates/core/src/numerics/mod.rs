//! Dense linear-algebra kernel shared by every CSP variant.
//!
//! Everything here is a pure function of its inputs (plus explicit seeds), so
//! the routines can be called from any number of threads.

mod eigen;
mod rotation;
mod subspace;

pub use eigen::{gen_sym_eig, sym_eig, EigenOrder, EigenPairs};
pub use rotation::{
    expm_antisym, perturb_rotation, perturb_rotation_sample, rand_rotation, standard_normal_matrix,
    RotationSample,
};
pub use subspace::{
    orthonormal_complement, orthonormalize, pca_no_mean, principal_angle_similarity,
    random_subspace, ProjectOut,
};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Independent child seed for `stream` under `base` (SplitMix64 finalizer on
/// both words), so parallel work draws from decorrelated generators.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(base ^ mix(stream))
}

/// Relative tolerance used to accept a matrix as symmetric.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Absolute tolerance on `QᵀQ − I` for orthonormal bases.
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-8;

/// A finite, symmetric, dense real matrix.
///
/// Construction checks symmetry within [`SYMMETRY_TOLERANCE`] (relative to the
/// largest entry) and stores the exactly symmetrized matrix `(S + Sᵀ)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::mismatch("symmetric matrix (columns)", m.nrows(), m.ncols()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let scale = m.amax();
        let tolerance = SYMMETRY_TOLERANCE * scale;
        let max_deviation = max_asymmetry(&m);
        if max_deviation > tolerance {
            return Err(Error::NotSymmetric {
                max_deviation,
                tolerance,
            });
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes without validation. Use only for matrices that are
    /// symmetric by construction up to rounding.
    pub fn symmetrized(m: Matrix) -> Self {
        let n = m.nrows();
        debug_assert!(m.is_square());
        let mut out = m;
        for j in 0..n {
            for i in (j + 1)..n {
                let v = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        SymMatrix(out)
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix(Matrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix(Matrix::zeros(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymMatrix(Matrix::from_diagonal(&Vector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_inner(self) -> Matrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `self + other`, dimension-checked.
    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        check_same_dim(self, other, "matrix sum")?;
        Ok(SymMatrix(&self.0 + &other.0))
    }

    /// `self · scale`.
    pub fn scaled(&self, scale: f64) -> SymMatrix {
        SymMatrix(&self.0 * scale)
    }

    /// `self + ridge · I`.
    pub fn with_ridge(&self, ridge: f64) -> SymMatrix {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += ridge;
        }
        SymMatrix(m)
    }

    /// Congruence `Tᵀ · S · T`.
    pub fn congruence(&self, t: &Matrix) -> Result<SymMatrix> {
        if t.nrows() != self.dim() {
            return Err(Error::mismatch("congruence transform rows", self.dim(), t.nrows()));
        }
        Ok(SymMatrix::symmetrized(t.transpose() * &self.0 * t))
    }

    /// Quadratic form `vᵀ S v`.
    pub fn quad_form(&self, v: &Vector) -> f64 {
        v.dot(&(&self.0 * v))
    }
}

impl AsRef<SymMatrix> for SymMatrix {
    fn as_ref(&self) -> &SymMatrix {
        self
    }
}

impl TryFrom<Matrix> for SymMatrix {
    type Error = Error;
    fn try_from(m: Matrix) -> Result<Self> {
        SymMatrix::new(m)
    }
}

impl From<SymMatrix> for Matrix {
    fn from(s: SymMatrix) -> Matrix {
        s.0
    }
}

pub(crate) fn check_same_dim(a: &SymMatrix, b: &SymMatrix, context: &str) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::mismatch(context, a.dim(), b.dim()));
    }
    Ok(())
}

pub(crate) fn max_asymmetry(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// An `ambient_dim × k` matrix with orthonormal columns. `k = 0` is allowed
/// and represents the trivial subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    columns: Matrix,
}

impl OrthonormalBasis {
    pub fn new(columns: Matrix) -> Result<Self> {
        if columns.ncols() > columns.nrows() {
            return Err(Error::InvalidParameter(format!(
                "subspace dimension {} exceeds ambient dimension {}",
                columns.ncols(),
                columns.nrows()
            )));
        }
        if columns.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let gram = columns.transpose() * &columns;
        let defect = (gram - Matrix::identity(columns.ncols(), columns.ncols())).amax();
        if defect > ORTHONORMALITY_TOLERANCE {
            return Err(Error::NotOrthonormal { defect });
        }
        Ok(OrthonormalBasis { columns })
    }

    pub(crate) fn new_unchecked(columns: Matrix) -> Self {
        OrthonormalBasis { columns }
    }

    pub fn empty(ambient_dim: usize) -> Self {
        OrthonormalBasis {
            columns: Matrix::zeros(ambient_dim, 0),
        }
    }

    /// The span of the first `k` coordinate axes.
    pub fn coordinate_axes(ambient_dim: usize, axes: std::ops::Range<usize>) -> Result<Self> {
        if axes.end > ambient_dim {
            return Err(Error::InvalidParameter(format!(
                "axes {axes:?} outside ambient dimension {ambient_dim}"
            )));
        }
        let mut m = Matrix::zeros(ambient_dim, axes.len());
        for (col, axis) in axes.enumerate() {
            m[(axis, col)] = 1.0;
        }
        Ok(OrthonormalBasis { columns: m })
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &Matrix {
        &self.columns
    }

    pub fn into_columns(self) -> Matrix {
        self.columns
    }

    /// The image of this basis under a rotation (or any orthogonal map).
    pub fn rotated(&self, rotation: &Matrix) -> Result<Self> {
        if rotation.ncols() != self.ambient_dim() {
            return Err(Error::mismatch("rotation columns", self.ambient_dim(), rotation.ncols()));
        }
        OrthonormalBasis::new(rotation * &self.columns)
    }

    /// Keeps only the first `k` columns.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.min(self.dim());
        OrthonormalBasis {
            columns: self.columns.columns(0, k).into_owned(),
        }
    }
}
