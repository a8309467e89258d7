use nalgebra::{Cholesky, SymmetricEigen};

use super::{check_same_dim, Matrix, SymMatrix, Vector};
use crate::error::{Error, Result};

/// Sort order for [`sym_eig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenOrder {
    DescendingValue,
    DescendingAbsValue,
}

/// Eigenvalues with column-matched eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vector,
    pub vectors: Matrix,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Keeps the first `k` pairs.
    pub fn truncated(&self, k: usize) -> EigenPairs {
        let k = k.min(self.len());
        EigenPairs {
            values: self.values.rows(0, k).into_owned(),
            vectors: self.vectors.columns(0, k).into_owned(),
        }
    }
}

/// Flips the sign of every column so its largest-magnitude entry is positive.
/// Ties between equal magnitudes resolve to the first such entry.
pub(crate) fn fix_signs(vectors: &mut Matrix) {
    for mut col in vectors.column_iter_mut() {
        let mut best = 0.0_f64;
        let mut best_val = 0.0_f64;
        for &v in col.iter() {
            if v.abs() > best {
                best = v.abs();
                best_val = v;
            }
        }
        if best_val < 0.0 {
            col.neg_mut();
        }
    }
}

fn sorted_pairs(values: &Vector, vectors: &Matrix, key: impl Fn(f64) -> f64) -> EigenPairs {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // Stable sort: equal keys keep the solver's output order.
    order.sort_by(|&i, &j| key(values[j]).total_cmp(&key(values[i])));
    let values = Vector::from_iterator(order.len(), order.iter().map(|&i| values[i]));
    let mut sorted = Matrix::zeros(vectors.nrows(), order.len());
    for (dst, &src) in order.iter().enumerate() {
        sorted.set_column(dst, &vectors.column(src));
    }
    fix_signs(&mut sorted);
    EigenPairs {
        values,
        vectors: sorted,
    }
}

/// Eigendecomposition of a symmetric matrix, sorted by `order`, with the
/// largest-magnitude-entry-positive sign convention.
pub fn sym_eig(s: &SymMatrix, order: EigenOrder) -> EigenPairs {
    let eig = SymmetricEigen::new(s.as_matrix().clone());
    match order {
        EigenOrder::DescendingValue => sorted_pairs(&eig.eigenvalues, &eig.eigenvectors, |v| v),
        EigenOrder::DescendingAbsValue => {
            sorted_pairs(&eig.eigenvalues, &eig.eigenvectors, f64::abs)
        }
    }
}

fn min_eigenvalue(s: &SymMatrix) -> f64 {
    SymmetricEigen::new(s.as_matrix().clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Smallest eigenvalue a denominator matrix may have relative to its size.
pub(crate) fn pd_threshold(b: &SymMatrix) -> f64 {
    1e-12 * b.trace() / b.dim().max(1) as f64
}

/// Inverse Cholesky factor `L⁻¹` of `b = L·Lᵀ`, after checking that the
/// smallest eigenvalue of `b` exceeds `1e-12 · trace(b)/dim`.
pub(crate) fn inverse_cholesky_factor(b: &SymMatrix) -> Result<Matrix> {
    let threshold = pd_threshold(b);
    let reject = |b: &SymMatrix| Error::NotPositiveDefinite {
        min_eigenvalue: min_eigenvalue(b),
        threshold,
    };
    if !(threshold > 0.0) {
        return Err(reject(b));
    }
    let chol = Cholesky::new(b.as_matrix().clone()).ok_or_else(|| reject(b))?;
    let n = b.dim();
    let linv = chol
        .l()
        .solve_lower_triangular(&Matrix::identity(n, n))
        .ok_or_else(|| reject(b))?;
    // λ_min(B) = 1/‖B⁻¹‖₂ ≥ 1/‖L⁻¹‖_F², so this bound certifies the
    // threshold cheaply; only borderline cases pay for a full spectrum.
    let bound = 1.0 / linv.norm_squared();
    if bound <= threshold && min_eigenvalue(b) <= threshold {
        return Err(reject(b));
    }
    Ok(linv)
}

/// Solves `A·w = λ·B·w` for symmetric `A` and positive definite `B` by
/// Cholesky whitening. Eigenvalues are returned in descending order and the
/// eigenvectors are B-orthonormal (`WᵀBW = I`).
pub fn gen_sym_eig(a: &SymMatrix, b: &SymMatrix) -> Result<EigenPairs> {
    check_same_dim(a, b, "generalized eigenproblem")?;
    let linv = inverse_cholesky_factor(b)?;
    let whitened = SymMatrix::symmetrized(&linv * a.as_matrix() * linv.transpose());
    let eig = SymmetricEigen::new(whitened.into_inner());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = Vector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let mut y = Matrix::zeros(a.dim(), order.len());
    for (dst, &src) in order.iter().enumerate() {
        y.set_column(dst, &eig.eigenvectors.column(src));
    }
    let mut vectors = linv.transpose() * y;
    fix_signs(&mut vectors);
    Ok(EigenPairs { values, vectors })
}
