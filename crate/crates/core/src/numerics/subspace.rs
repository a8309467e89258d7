use nalgebra::QR;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{sym_eig, EigenOrder, Matrix, OrthonormalBasis, SymMatrix};
use super::rotation::standard_normal_matrix;
use crate::error::{Error, Result};

/// Deflation by `Q = I − B·Bᵀ` for an orthonormal basis `B`.
pub trait ProjectOut: Sized {
    fn project_out(&self, basis: &OrthonormalBasis) -> Result<Self>;
}

impl ProjectOut for Matrix {
    /// `Q·X`: removes the component of every column inside `span(B)`.
    fn project_out(&self, basis: &OrthonormalBasis) -> Result<Matrix> {
        if self.nrows() != basis.ambient_dim() {
            return Err(Error::mismatch("projection rows", basis.ambient_dim(), self.nrows()));
        }
        let b = basis.columns();
        Ok(self - b * (b.transpose() * self))
    }
}

impl ProjectOut for SymMatrix {
    /// `Q·S·Q`.
    fn project_out(&self, basis: &OrthonormalBasis) -> Result<SymMatrix> {
        let left = self.as_matrix().project_out(basis)?;
        let both = left.transpose().project_out(basis)?;
        Ok(SymMatrix::symmetrized(both))
    }
}

/// Principal axes of `P·Pᵀ` without centering: the `nu` leading eigenvectors.
pub fn pca_no_mean(p: &Matrix, nu: usize) -> Result<OrthonormalBasis> {
    let max = p.nrows().min(p.ncols());
    if nu == 0 || nu > max {
        return Err(Error::InvalidParameter(format!(
            "subspace dimension {nu} outside 1..={max}"
        )));
    }
    let scatter = SymMatrix::symmetrized(p * p.transpose());
    let eig = sym_eig(&scatter, EigenOrder::DescendingValue);
    Ok(OrthonormalBasis::new_unchecked(eig.vectors.columns(0, nu).into_owned()))
}

/// Mean squared cosine of the principal angles between two subspaces,
/// `‖UᵀV‖_F² / min(dim U, dim V)`.
pub fn principal_angle_similarity(u: &OrthonormalBasis, v: &OrthonormalBasis) -> Result<f64> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Error::mismatch("subspace ambient dimension", u.ambient_dim(), v.ambient_dim()));
    }
    let k = u.dim().min(v.dim());
    if k == 0 {
        return Err(Error::InvalidParameter("similarity of an empty subspace".into()));
    }
    let cross = u.columns().transpose() * v.columns();
    Ok((cross.norm_squared() / k as f64).clamp(0.0, 1.0))
}

/// Orthonormal basis of the column span of `x` (Householder QR). Columns that
/// are numerically dependent are rejected.
pub fn orthonormalize(x: &Matrix) -> Result<OrthonormalBasis> {
    let k = x.ncols();
    if k > x.nrows() {
        return Err(Error::Singular(format!(
            "{k} columns cannot be independent in dimension {}",
            x.nrows()
        )));
    }
    if k == 0 {
        return Ok(OrthonormalBasis::empty(x.nrows()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let qr = QR::new(x.clone());
    let r = qr.r();
    let scale = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if let Some(i) = (0..k).find(|&i| r[(i, i)].abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::Singular(format!("column {i} is linearly dependent")));
    }
    Ok(OrthonormalBasis::new_unchecked(qr.q()))
}

/// Orthonormal basis of the orthogonal complement of `span(B)`.
pub fn orthonormal_complement(basis: &OrthonormalBasis) -> OrthonormalBasis {
    let n = basis.ambient_dim();
    let keep = n - basis.dim();
    let b = basis.columns();
    let projector = SymMatrix::symmetrized(Matrix::identity(n, n) - b * b.transpose());
    let eig = sym_eig(&projector, EigenOrder::DescendingValue);
    OrthonormalBasis::new_unchecked(eig.vectors.columns(0, keep).into_owned())
}

/// Haar-uniform random `d`-dimensional subspace of ℝ^`ambient_dim`.
pub fn random_subspace(ambient_dim: usize, d: usize, seed: u64) -> Result<OrthonormalBasis> {
    if d > ambient_dim {
        return Err(Error::InvalidParameter(format!(
            "subspace dimension {d} exceeds ambient dimension {ambient_dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    orthonormalize(&standard_normal_matrix(ambient_dim, d, &mut rng))
}
