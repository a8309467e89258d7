//! Common spatial patterns: plain and penalized training, patterns, and
//! log-variance features.

use crate::data::TrialSet;
use crate::error::{Error, Result};
use crate::numerics::{
    check_same_dim, gen_sym_eig, orthonormalize, sym_eig, EigenOrder, EigenPairs, Matrix,
    OrthonormalBasis, SymMatrix, Vector,
};

/// Filters per class used throughout unless configured otherwise.
pub const DEFAULT_FILTERS_PER_CLASS: usize = 3;
/// Floor inside the logarithm of a band-power feature.
pub const LOG_FLOOR: f64 = 1e-12;
/// Relative ridge added to a denominator that fails the definiteness check.
pub const RIDGE_FRACTION: f64 = 1e-10;

/// Paired spatial filters with their class-1 Rayleigh quotients and patterns.
///
/// Columns `0..m` favour class 1 (largest quotient first), columns `m..2m`
/// favour class 2 (smallest quotient first). Every filter has unit norm.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialFilterBank {
    filters: Matrix,
    eigenvalues: Vector,
    patterns: Matrix,
    per_class: usize,
}

impl SpatialFilterBank {
    /// Assembles a bank from `C × 2m` filters; normalizes the columns, records
    /// `wᵀΣ₁w / wᵀ(Σ₁+Σ₂)w` per filter and computes patterns against
    /// `Σ₁ + Σ₂`.
    pub fn from_filters(filters: Matrix, sigma1: &SymMatrix, sigma2: &SymMatrix) -> Result<Self> {
        let pooled = sigma1.add(sigma2)?;
        Self::from_filters_with_denominator(filters, sigma1, &pooled, &pooled)
    }

    fn from_filters_with_denominator(
        mut filters: Matrix,
        sigma1: &SymMatrix,
        denominator: &SymMatrix,
        pooled: &SymMatrix,
    ) -> Result<Self> {
        let k = filters.ncols();
        if k == 0 || k % 2 != 0 {
            return Err(Error::InvalidParameter(format!("filter bank needs an even, nonzero column count, got {k}")));
        }
        if filters.nrows() != sigma1.dim() {
            return Err(Error::mismatch("filter length", sigma1.dim(), filters.nrows()));
        }
        for mut col in filters.column_iter_mut() {
            let norm = col.norm();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::Singular("zero or non-finite spatial filter".into()));
            }
            col /= norm;
        }
        let eigenvalues = Vector::from_iterator(
            k,
            filters.column_iter().map(|w| {
                let w = w.into_owned();
                sigma1.quad_form(&w) / denominator.quad_form(&w)
            }),
        );
        let patterns = compute_patterns(&filters, pooled)?;
        Ok(SpatialFilterBank {
            filters,
            eigenvalues,
            patterns,
            per_class: k / 2,
        })
    }

    /// `C × 2m` filter matrix.
    pub fn filters(&self) -> &Matrix {
        &self.filters
    }

    pub fn eigenvalues(&self) -> &Vector {
        &self.eigenvalues
    }

    /// `C × 2m` pattern matrix with `AᵀW = I`.
    pub fn patterns(&self) -> &Matrix {
        &self.patterns
    }

    pub fn filters_per_class(&self) -> usize {
        self.per_class
    }

    pub fn channels(&self) -> usize {
        self.filters.nrows()
    }

    /// Orthonormal basis of the span of all filters.
    pub fn span(&self) -> Result<OrthonormalBasis> {
        orthonormalize(&self.filters)
    }

    /// Log-variance features of one `C × T` trial.
    pub fn log_variance_features(&self, trial: &Matrix) -> Result<Vector> {
        if trial.nrows() != self.channels() {
            return Err(Error::mismatch("trial channels", self.channels(), trial.nrows()));
        }
        let projected = self.filters.transpose() * trial;
        Ok(band_power(&projected, trial.ncols()).column(0).into_owned())
    }

    /// Features of every trial of `ts`, one row per trial.
    pub fn features(&self, ts: &TrialSet) -> Result<Matrix> {
        if ts.channels() != self.channels() {
            return Err(Error::mismatch("trial channels", self.channels(), ts.channels()));
        }
        let projected = self.filters.transpose() * ts.data();
        Ok(band_power(&projected, ts.samples_per_trial()).transpose())
    }
}

/// `ln(mean_t y_t² + ε)` for each row of each `samples`-wide block; returns
/// `rows × blocks`.
fn band_power(projected: &Matrix, samples: usize) -> Matrix {
    let blocks = projected.ncols() / samples;
    Matrix::from_fn(projected.nrows(), blocks, |r, b| {
        let row = projected.row(r);
        let mut acc = 0.0;
        for t in b * samples..(b + 1) * samples {
            acc += row[t] * row[t];
        }
        (acc / samples as f64 + LOG_FLOOR).ln()
    })
}

/// Generalized eigendecomposition that retries once with a ridge of
/// `1e-10 · trace/dim` when `b` fails the definiteness check.
pub(crate) fn gen_sym_eig_ridged(a: &SymMatrix, b: &SymMatrix) -> Result<EigenPairs> {
    match gen_sym_eig(a, b) {
        Err(Error::NotPositiveDefinite { .. }) if b.trace() > 0.0 => {
            let ridge = RIDGE_FRACTION * b.trace() / b.dim() as f64;
            gen_sym_eig(a, &b.with_ridge(ridge))
        }
        other => other,
    }
}

fn check_filter_count(dim: usize, m: usize) -> Result<()> {
    if m == 0 || 2 * m > dim {
        return Err(Error::InvalidParameter(format!(
            "{m} filters per class need 1 ≤ 2m ≤ {dim} channels"
        )));
    }
    Ok(())
}

/// Plain CSP: solves `Σ₁w = λ(Σ₁+Σ₂)w` and keeps the `m` largest and `m`
/// smallest eigenvalues.
pub fn csp_train(sigma1: &SymMatrix, sigma2: &SymMatrix, m: usize) -> Result<SpatialFilterBank> {
    check_same_dim(sigma1, sigma2, "class covariances")?;
    check_filter_count(sigma1.dim(), m)?;
    let pooled = sigma1.add(sigma2)?;
    let eig = gen_sym_eig_ridged(sigma1, &pooled)?;
    let c = sigma1.dim();
    let picks: Vec<usize> = (0..m).chain((c - m..c).rev()).collect();
    let filters = Matrix::from_columns(&picks.iter().map(|&i| eig.vectors.column(i)).collect::<Vec<_>>());
    SpatialFilterBank::from_filters_with_denominator(filters, sigma1, &pooled, &pooled)
}

/// CSP with `Δ` added to the denominator. Class-1 filters are the top `m`
/// of `Σ₁w = λ(Σ₁+Σ₂+Δ)w`, class-2 filters the top `m` of the mirrored
/// problem with `Σ₂` in the numerator. Recorded eigenvalues are the class-1
/// quotients `wᵀΣ₁w / wᵀ(Σ₁+Σ₂+Δ)w`.
pub fn penalized_csp_train(
    sigma1: &SymMatrix,
    sigma2: &SymMatrix,
    penalty: &SymMatrix,
    m: usize,
) -> Result<SpatialFilterBank> {
    check_same_dim(sigma1, penalty, "penalty matrix")?;
    let eig = sym_eig(penalty, EigenOrder::DescendingValue);
    let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = -1e-10 * penalty.trace().abs().max(f64::MIN_POSITIVE);
    if min < threshold {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: min,
            threshold,
        });
    }
    penalized_csp_unchecked(sigma1, sigma2, penalty, m)
}

/// [`penalized_csp_train`] for a penalty that is positive semidefinite by
/// construction.
pub(crate) fn penalized_csp_unchecked(
    sigma1: &SymMatrix,
    sigma2: &SymMatrix,
    penalty: &SymMatrix,
    m: usize,
) -> Result<SpatialFilterBank> {
    check_same_dim(sigma1, sigma2, "class covariances")?;
    check_filter_count(sigma1.dim(), m)?;
    let pooled = sigma1.add(sigma2)?;
    let denominator = pooled.add(penalty)?;
    let first = gen_sym_eig_ridged(sigma1, &denominator)?;
    let second = gen_sym_eig_ridged(sigma2, &denominator)?;
    let cols: Vec<_> = (0..m)
        .map(|i| first.vectors.column(i))
        .chain((0..m).map(|i| second.vectors.column(i)))
        .collect();
    let filters = Matrix::from_columns(&cols);
    SpatialFilterBank::from_filters_with_denominator(filters, sigma1, &denominator, &pooled)
}

/// Forward-model patterns `A = Σ·W·(WᵀΣW)⁻¹`, so that `AᵀW = I`.
pub fn compute_patterns(filters: &Matrix, sigma: &SymMatrix) -> Result<Matrix> {
    if filters.nrows() != sigma.dim() {
        return Err(Error::mismatch("filter length", sigma.dim(), filters.nrows()));
    }
    patterns_with(filters, sigma).or_else(|err| {
        // A filter inside the null space of a singular covariance.
        if sigma.trace() > 0.0 {
            patterns_with(filters, &sigma.with_ridge(RIDGE_FRACTION * sigma.trace() / sigma.dim() as f64))
        } else {
            Err(err)
        }
    })
}

fn patterns_with(filters: &Matrix, sigma: &SymMatrix) -> Result<Matrix> {
    let sw = sigma.as_matrix() * filters;
    let gram = filters.transpose() * &sw;
    let gram = SymMatrix::symmetrized(gram);
    let chol = nalgebra::Cholesky::new(gram.into_inner())
        .ok_or_else(|| Error::Singular("filters are rank deficient under the covariance".into()))?;
    // A = S·G⁻¹ with G symmetric, i.e. Aᵀ = G⁻¹·Sᵀ.
    Ok(chol.solve(&sw.transpose()).transpose())
}
