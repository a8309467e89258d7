//! Two-class linear discriminant on feature rows.

use std::cmp::Ordering;

use crate::data::ClassLabel;
use crate::error::{Error, Result};
use crate::numerics::{sym_eig, EigenOrder, Matrix, SymMatrix, Vector};

/// Eigenvalues of the pooled covariance below this fraction of the largest
/// are dropped from its inverse.
pub const PINV_CUTOFF: f64 = 1e-10;

/// `score(x) = wᵀx + b`; positive scores mean class 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LdaModel {
    weight: Vector,
    bias: f64,
}

impl LdaModel {
    pub fn new(weight: Vector, bias: f64) -> Result<Self> {
        if weight.iter().any(|v| !v.is_finite()) || !bias.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(LdaModel { weight, bias })
    }

    pub fn weight(&self) -> &Vector {
        &self.weight
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn dim(&self) -> usize {
        self.weight.len()
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::mismatch("feature length", self.dim(), x.len()));
        }
        Ok(self.weight.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias)
    }

    /// Class 1 iff the score is strictly positive.
    pub fn predict(&self, x: &[f64]) -> Result<ClassLabel> {
        Ok(if self.score(x)? > 0.0 { ClassLabel::One } else { ClassLabel::Two })
    }

    /// One prediction per row of `features`.
    pub fn predict_rows(&self, features: &Matrix) -> Result<Vec<ClassLabel>> {
        if features.ncols() != self.dim() {
            return Err(Error::mismatch("feature columns", self.dim(), features.ncols()));
        }
        let scores = features * &self.weight;
        Ok(scores
            .iter()
            .map(|s| if s + self.bias > 0.0 { ClassLabel::One } else { ClassLabel::Two })
            .collect())
    }

    /// Fraction of rows whose prediction equals the label.
    pub fn accuracy(&self, features: &Matrix, labels: &[ClassLabel]) -> Result<f64> {
        if features.nrows() != labels.len() {
            return Err(Error::mismatch("labels", features.nrows(), labels.len()));
        }
        if labels.is_empty() {
            return Err(Error::EmptyTrialSet);
        }
        let predicted = self.predict_rows(features)?;
        let correct = predicted.iter().zip(labels).filter(|(p, l)| p == l).count();
        Ok(correct as f64 / labels.len() as f64)
    }
}

/// Options for [`lda_train_with`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LdaConfig {
    /// Adds `ridge · tr(Σ)/d` to the pooled covariance diagonal.
    pub ridge: f64,
}

/// Fisher LDA with the pooled within-class covariance.
pub fn lda_train(features: &Matrix, labels: &[ClassLabel]) -> Result<LdaModel> {
    lda_train_with(features, labels, LdaConfig::default())
}

pub fn lda_train_with(features: &Matrix, labels: &[ClassLabel], cfg: LdaConfig) -> Result<LdaModel> {
    if features.nrows() != labels.len() {
        return Err(Error::mismatch("labels", features.nrows(), labels.len()));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(cfg.ridge >= 0.0) || !cfg.ridge.is_finite() {
        return Err(Error::InvalidParameter(format!("ridge must be finite and ≥ 0, got {}", cfg.ridge)));
    }
    let d = features.ncols();
    let rows = |class: ClassLabel| -> Result<Vec<Vec<f64>>> {
        let mut out: Vec<Vec<f64>> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == class)
            .map(|(i, _)| features.row(i).iter().copied().collect())
            .collect();
        match out.len() {
            0 => return Err(Error::EmptyClass(class.as_int())),
            1 => {
                return Err(Error::InvalidParameter(format!("class {class} needs at least 2 samples")));
            }
            _ => {}
        }
        // Canonical order makes every sum independent of the input order.
        out.sort_by(|a, b| lexicographic(a, b));
        Ok(out)
    };
    let class1 = rows(ClassLabel::One)?;
    let class2 = rows(ClassLabel::Two)?;

    let mean = |rows: &[Vec<f64>]| -> Vector {
        let mut m = Vector::zeros(d);
        for r in rows {
            for (acc, v) in m.iter_mut().zip(r) {
                *acc += v;
            }
        }
        m / rows.len() as f64
    };
    let (mu1, mu2) = (mean(&class1), mean(&class2));
    let mut scatter = Matrix::zeros(d, d);
    for (rows, mu) in [(&class1, &mu1), (&class2, &mu2)] {
        for r in rows.iter() {
            let centered = Vector::from_iterator(d, r.iter().zip(mu.iter()).map(|(v, m)| v - m));
            scatter += &centered * centered.transpose();
        }
    }
    let dof = (class1.len() + class2.len() - 2) as f64;
    let mut pooled = scatter / dof;
    if cfg.ridge > 0.0 {
        let shift = cfg.ridge * pooled.trace() / d as f64;
        for i in 0..d {
            pooled[(i, i)] += shift;
        }
    }
    let weight = pseudo_inverse(&SymMatrix::symmetrized(pooled)) * (&mu1 - &mu2);
    let bias = -weight.dot(&((&mu1 + &mu2) / 2.0));
    LdaModel::new(weight, bias)
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Moore–Penrose inverse of a symmetric PSD matrix via its eigenvalues.
fn pseudo_inverse(s: &SymMatrix) -> Matrix {
    let eig = sym_eig(s, EigenOrder::DescendingValue);
    let top = eig.values.iter().copied().fold(0.0, f64::max);
    let d = s.dim();
    let mut out = Matrix::zeros(d, d);
    if top <= 0.0 {
        return out;
    }
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda > PINV_CUTOFF * top {
            let v = eig.vectors.column(k);
            out += v * v.transpose() / lambda;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::standard_normal_matrix;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn alternating(n: usize) -> Vec<ClassLabel> {
        (0..n).map(|i| if i % 2 == 0 { ClassLabel::One } else { ClassLabel::Two }).collect()
    }

    fn gaussian_rows(n: usize, mu1: &[f64], mu2: &[f64], sd: &[f64], seed: u64) -> (Matrix, Vec<ClassLabel>) {
        let d = mu1.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = standard_normal_matrix(n, d, &mut rng);
        let labels = alternating(n);
        let x = Matrix::from_fn(n, d, |i, j| {
            let mu = if labels[i] == ClassLabel::One { mu1[j] } else { mu2[j] };
            mu + sd[j] * noise[(i, j)]
        });
        (x, labels)
    }

    #[test]
    fn symmetric_means_put_threshold_at_zero() {
        let x = Matrix::from_column_slice(4, 1, &[-2.0, 0.0, 2.0, 0.0]);
        let labels = vec![ClassLabel::Two, ClassLabel::Two, ClassLabel::One, ClassLabel::One];
        // Class means ±1 with equal spread.
        let m = lda_train(&x, &labels).unwrap();
        assert!(m.weight()[0] > 0.0);
        assert!((m.bias() / m.weight()[0]).abs() <= 1e-12);
    }

    #[test]
    fn closed_form_direction() {
        let (x, labels) = gaussian_rows(10_000, &[1.0, 0.0], &[0.0, 0.0], &[1.0, 2.0], 3);
        let w = lda_train(&x, &labels).unwrap().weight().clone();
        let angle = (w[0] / w.norm()).acos().to_degrees();
        assert!(angle <= 2.0, "{angle}°");
    }

    #[test]
    fn no_signal_gives_near_zero_weight_and_chance() {
        let (x, labels) = gaussian_rows(4000, &[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], 5);
        let m = lda_train(&x, &labels).unwrap();
        assert!(m.weight().norm() <= 0.1);
        let (fresh, fresh_labels) = gaussian_rows(4000, &[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], 6);
        let acc = m.accuracy(&fresh, &fresh_labels).unwrap();
        assert!((acc - 0.5).abs() <= 0.05, "{acc}");
    }

    #[test]
    fn separated_training_data_is_perfect() {
        let x = Matrix::from_column_slice(6, 1, &[3.0, -3.0, 3.5, -2.5, 2.8, -3.1]);
        let labels = alternating(6);
        let m = lda_train(&x, &labels).unwrap();
        assert_eq!(m.accuracy(&x, &labels).unwrap(), 1.0);
    }

    #[test]
    fn zero_score_is_class_two() {
        let m = LdaModel::new(Vector::from_vec(vec![1.0, -1.0]), 0.0).unwrap();
        assert_eq!(m.predict(&[2.0, 2.0]).unwrap(), ClassLabel::Two);
        assert_eq!(m.predict(&[2.0, 1.0]).unwrap(), ClassLabel::One);
    }

    #[test]
    fn degenerate_feature_uses_pseudo_inverse() {
        // Second feature constant: pooled covariance is singular.
        let x = Matrix::from_row_slice(4, 2, &[1.0, 7.0, -1.0, 7.0, 1.2, 7.0, -0.8, 7.0]);
        let m = lda_train(&x, &alternating(4)).unwrap();
        assert!(m.weight()[1].abs() <= 1e-12);
        assert_eq!(m.accuracy(&x, &alternating(4)).unwrap(), 1.0);
    }

    #[test]
    fn ridge_shrinks_toward_mean_difference() {
        let (x, labels) = gaussian_rows(400, &[1.0, 1.0], &[0.0, 0.0], &[1.0, 3.0], 8);
        let plain = lda_train(&x, &labels).unwrap();
        let heavy = lda_train_with(&x, &labels, LdaConfig { ridge: 1e6 }).unwrap();
        let class_mean = |c: ClassLabel| {
            let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
            x.select_rows(&idx).row_mean().transpose()
        };
        let diff = class_mean(ClassLabel::One) - class_mean(ClassLabel::Two);
        let cos = |w: &Vector| w.dot(&diff) / (w.norm() * diff.norm());
        assert!(cos(heavy.weight()) > cos(plain.weight()));
        assert!(cos(heavy.weight()) >= 1.0 - 1e-9);
    }

    #[test]
    fn invalid_inputs() {
        let x = Matrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        assert!(matches!(lda_train(&x, &[ClassLabel::One; 3]), Err(Error::EmptyClass(2))));
        assert!(lda_train(&x, &[ClassLabel::One, ClassLabel::One, ClassLabel::Two]).is_err());
        assert!(lda_train(&x, &[ClassLabel::One]).is_err());
        let m = LdaModel::new(Vector::from_vec(vec![1.0]), 0.0).unwrap();
        assert!(m.predict(&[1.0, 2.0]).is_err());
    }

    proptest! {
        #[test]
        fn positive_rescaling_keeps_predictions(
            w in prop::collection::vec(-5.0f64..5.0, 3), b in -5.0f64..5.0, s in 1e-3f64..1e3,
            x in prop::collection::vec(-5.0f64..5.0, 3),
        ) {
            let m = LdaModel::new(Vector::from_vec(w.clone()), b).unwrap();
            let scaled = LdaModel::new(Vector::from_vec(w) * s, b * s).unwrap();
            let (a, c) = (m.score(&x).unwrap(), scaled.score(&x).unwrap());
            prop_assume!(a.abs() > 1e-9);
            prop_assert_eq!(m.predict(&x).unwrap(), scaled.predict(&x).unwrap());
            prop_assert!(c.signum() == a.signum());
        }

        #[test]
        fn sample_order_does_not_matter(seed in any::<u64>(), rot in 1usize..20) {
            let (x, labels) = gaussian_rows(20, &[1.0, 0.5, 0.0], &[0.0, 0.0, 0.3], &[1.0, 1.0, 2.0], seed);
            let perm: Vec<usize> = (0..20).map(|i| (i * 7 + rot) % 20).collect();
            let xp = Matrix::from_fn(20, 3, |i, j| x[(perm[i], j)]);
            let lp: Vec<ClassLabel> = perm.iter().map(|&i| labels[i]).collect();
            let a = lda_train(&x, &labels).unwrap();
            let b = lda_train(&xp, &lp).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn separable_data_trains_perfectly(seed in any::<u64>()) {
            let (mut x, labels) = gaussian_rows(40, &[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], seed);
            for (i, l) in labels.iter().enumerate() {
                x[(i, 0)] += if *l == ClassLabel::One { 10.0 } else { -10.0 };
            }
            let m = lda_train(&x, &labels).unwrap();
            prop_assert_eq!(m.accuracy(&x, &labels).unwrap(), 1.0);
        }
    }
}
