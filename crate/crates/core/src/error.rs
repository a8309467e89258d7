use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("matrix must be symmetric (max deviation {max_deviation:.3e} exceeds tolerance {tolerance:.3e})")]
    NotSymmetric { max_deviation: f64, tolerance: f64 },

    #[error("matrix must be antisymmetric (max deviation {max_deviation:.3e} exceeds tolerance {tolerance:.3e})")]
    NotAntisymmetric { max_deviation: f64, tolerance: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.6e}, required > {threshold:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64, threshold: f64 },

    #[error("basis columns are not orthonormal (defect {defect:.3e})")]
    NotOrthonormal { defect: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no trials of class {0}")]
    EmptyClass(u8),

    #[error("trial set is empty")]
    EmptyTrialSet,

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("conjugacy constraints lost rank while extracting filter {filter} (rank {rank} of {expected})")]
    ConstraintRankLoss {
        filter: usize,
        rank: usize,
        expected: usize,
    },

    #[error("objective became non-finite at iteration {iteration} (trace: {trace:?})")]
    NonFiniteObjective { iteration: usize, trace: Vec<f64> },

    #[error("transfer method `{0}` requires at least one donor subject")]
    NoDonors(String),

    #[error("need at least {required} subjects, got {found}")]
    TooFewSubjects { required: usize, found: usize },

    #[error("bad magic in {path}: {detail}")]
    BadMagic { path: PathBuf, detail: String },

    #[error("truncated payload {path}: expected {expected} bytes, found {found}")]
    TruncatedPayload {
        path: PathBuf,
        expected: u64,
        found: u64,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn mismatch(context: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected,
            found,
        }
    }

    /// Wraps the error with a human-readable location (subject, method, file).
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Strips [`Error::Context`] layers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
