//! Epoch containers and covariance estimation.

mod io;

pub use io::{load_dataset, save_dataset, MANIFEST_FILE};

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{sym_eig, EigenOrder, Matrix, SymMatrix};

/// Two-class label. Serialized as `1` or `2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassLabel {
    One,
    Two,
}

impl ClassLabel {
    pub const BOTH: [ClassLabel; 2] = [ClassLabel::One, ClassLabel::Two];

    pub fn from_int(v: i64) -> Result<Self> {
        match v {
            1 => Ok(ClassLabel::One),
            2 => Ok(ClassLabel::Two),
            other => Err(Error::InvalidParameter(format!("class label must be 1 or 2, got {other}"))),
        }
    }

    pub fn as_int(self) -> u8 {
        match self {
            ClassLabel::One => 1,
            ClassLabel::Two => 2,
        }
    }

    pub fn other(self) -> Self {
        match self {
            ClassLabel::One => ClassLabel::Two,
            ClassLabel::Two => ClassLabel::One,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_int())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Session {
    Train,
    Test,
}

impl fmt::Display for Session {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Session::Train => "train",
            Session::Test => "test",
        })
    }
}

/// Labeled epochs of one session. Trials are stored side by side in a single
/// `channels × (n_trials · samples)` matrix; trial `i` occupies columns
/// `i·samples .. (i+1)·samples`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    samples: usize,
    data: Matrix,
    labels: Vec<ClassLabel>,
}

impl TrialSet {
    /// Builds a set from individual `C × T` trial matrices.
    pub fn from_trials(trials: &[Matrix], labels: Vec<ClassLabel>) -> Result<Self> {
        let Some(first) = trials.first() else {
            return Err(Error::EmptyTrialSet);
        };
        let (c, t) = first.shape();
        let mut data = Matrix::zeros(c, trials.len() * t);
        for (i, trial) in trials.iter().enumerate() {
            if trial.nrows() != c {
                return Err(Error::mismatch(format!("trial {i} channels"), c, trial.nrows()));
            }
            if trial.ncols() != t {
                return Err(Error::mismatch(format!("trial {i} samples"), t, trial.ncols()));
            }
            data.columns_mut(i * t, t).copy_from(trial);
        }
        Self::from_concatenated(data, t, labels)
    }

    /// Builds a set from trials already laid out side by side.
    pub fn from_concatenated(data: Matrix, samples: usize, labels: Vec<ClassLabel>) -> Result<Self> {
        if samples == 0 || data.nrows() == 0 {
            return Err(Error::InvalidParameter("trials need at least one channel and one sample".into()));
        }
        if data.ncols() != labels.len() * samples {
            return Err(Error::mismatch("trial columns", labels.len() * samples, data.ncols()));
        }
        if labels.is_empty() {
            return Err(Error::EmptyTrialSet);
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(TrialSet {
            samples,
            data,
            labels,
        })
    }

    pub fn channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn samples_per_trial(&self) -> usize {
        self.samples
    }

    pub fn n_trials(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[ClassLabel] {
        &self.labels
    }

    /// All trials side by side, `C × (n·T)`.
    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn trial(&self, i: usize) -> nalgebra::DMatrixView<'_, f64> {
        self.data.columns(i * self.samples, self.samples)
    }

    pub fn class_count(&self, class: ClassLabel) -> usize {
        self.labels.iter().filter(|&&l| l == class).count()
    }

    fn class_data(&self, class: ClassLabel) -> Result<Matrix> {
        let n = self.class_count(class);
        if n == 0 {
            return Err(Error::EmptyClass(class.as_int()));
        }
        let t = self.samples;
        let mut out = Matrix::zeros(self.channels(), n * t);
        let selected = self.labels.iter().enumerate().filter(|(_, &l)| l == class);
        for (slot, (i, _)) in selected.enumerate() {
            out.columns_mut(slot * t, t).copy_from(&self.trial(i));
        }
        Ok(out)
    }

    /// Mean over class-`class` trials of `X·Xᵀ/T`.
    pub fn class_covariance(&self, class: ClassLabel) -> Result<SymMatrix> {
        scatter_mean(&self.class_data(class)?)
    }

    /// Mean over all trials of `X·Xᵀ/T`.
    pub fn session_covariance(&self) -> Result<SymMatrix> {
        scatter_mean(&self.data)
    }

    /// Mean over class-`class` trials of `X·Xᵀ / tr(X·Xᵀ)`. All-zero trials
    /// contribute zero.
    pub fn class_covariance_trace_normalized(&self, class: ClassLabel) -> Result<SymMatrix> {
        let n = self.class_count(class);
        if n == 0 {
            return Err(Error::EmptyClass(class.as_int()));
        }
        let c = self.channels();
        let mut acc = Matrix::zeros(c, c);
        for (i, _) in self.labels.iter().enumerate().filter(|(_, &l)| l == class) {
            let x = self.trial(i);
            let scatter = &x * x.transpose();
            let tr = scatter.trace();
            if tr > 0.0 {
                acc += scatter / tr;
            }
        }
        Ok(SymMatrix::symmetrized(acc / n as f64))
    }
}

/// `X·Xᵀ / ncols(X)`: the per-trial `X·Xᵀ/T` averaged over trials of equal
/// length. Accumulation order is fixed by the matrix product.
fn scatter_mean(x: &Matrix) -> Result<SymMatrix> {
    if x.ncols() == 0 {
        return Err(Error::EmptyTrialSet);
    }
    Ok(SymMatrix::symmetrized(x * x.transpose() / x.ncols() as f64))
}

/// One subject's training and test sessions.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectRecord {
    pub id: String,
    pub train: TrialSet,
    pub test: TrialSet,
}

impl SubjectRecord {
    pub fn new(id: impl Into<String>, train: TrialSet, test: TrialSet) -> Result<Self> {
        let id = id.into();
        if train.channels() != test.channels() {
            return Err(Error::mismatch(
                format!("subject {id}: test channels"),
                train.channels(),
                test.channels(),
            ));
        }
        Ok(SubjectRecord { id, train, test })
    }

    pub fn channels(&self) -> usize {
        self.train.channels()
    }

    pub fn session(&self, session: Session) -> &TrialSet {
        match session {
            Session::Train => &self.train,
            Session::Test => &self.test,
        }
    }
}

/// Both class covariances of one session.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassCovariances {
    class1: SymMatrix,
    class2: SymMatrix,
}

impl ClassCovariances {
    pub fn new(class1: SymMatrix, class2: SymMatrix) -> Result<Self> {
        crate::numerics::check_same_dim(&class1, &class2, "class covariances")?;
        Ok(ClassCovariances { class1, class2 })
    }

    pub fn class1(&self) -> &SymMatrix {
        &self.class1
    }

    pub fn class2(&self) -> &SymMatrix {
        &self.class2
    }

    pub fn from_trials(ts: &TrialSet) -> Result<Self> {
        Ok(ClassCovariances {
            class1: ts.class_covariance(ClassLabel::One)?,
            class2: ts.class_covariance(ClassLabel::Two)?,
        })
    }

    pub fn get(&self, class: ClassLabel) -> &SymMatrix {
        match class {
            ClassLabel::One => &self.class1,
            ClassLabel::Two => &self.class2,
        }
    }

    pub fn dim(&self) -> usize {
        self.class1.dim()
    }

    /// `Σ₁ + Σ₂`.
    pub fn sum(&self) -> SymMatrix {
        SymMatrix::symmetrized(self.class1.as_matrix() + self.class2.as_matrix())
    }

    /// Both covariances under the congruence `Tᵀ·Σ·T`.
    pub fn congruence(&self, t: &Matrix) -> Result<Self> {
        Ok(ClassCovariances {
            class1: self.class1.congruence(t)?,
            class2: self.class2.congruence(t)?,
        })
    }
}

/// Which trials a covariance pools.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovScope {
    Class(ClassLabel),
    Pooled,
}

/// A channel covariance with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    matrix: SymMatrix,
    pub scope: CovScope,
    pub session: Session,
    pub subject_id: String,
}

impl CovarianceEstimate {
    /// Validates positive semidefiniteness within `−1e-10 · trace`.
    pub fn new(matrix: SymMatrix, scope: CovScope, session: Session, subject_id: impl Into<String>) -> Result<Self> {
        let eig = sym_eig(&matrix, EigenOrder::DescendingValue);
        let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
        let threshold = -1e-10 * matrix.trace().abs();
        if matrix.dim() > 0 && min < threshold {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
                threshold,
            });
        }
        Ok(CovarianceEstimate {
            matrix,
            scope,
            session,
            subject_id: subject_id.into(),
        })
    }

    /// Class covariance of one session of a subject.
    pub fn class(rec: &SubjectRecord, session: Session, class: ClassLabel) -> Result<Self> {
        Ok(CovarianceEstimate {
            matrix: rec.session(session).class_covariance(class)?,
            scope: CovScope::Class(class),
            session,
            subject_id: rec.id.clone(),
        })
    }

    /// Both-class covariance of one session of a subject.
    pub fn pooled(rec: &SubjectRecord, session: Session) -> Result<Self> {
        Ok(CovarianceEstimate {
            matrix: rec.session(session).session_covariance()?,
            scope: CovScope::Pooled,
            session,
            subject_id: rec.id.clone(),
        })
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> SymMatrix {
        self.matrix
    }
}

impl AsRef<SymMatrix> for CovarianceEstimate {
    fn as_ref(&self) -> &SymMatrix {
        &self.matrix
    }
}
