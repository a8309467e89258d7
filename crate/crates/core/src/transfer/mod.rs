//! Multi-subject spatial filtering: covariance shrinkage toward donors,
//! multi-task filters, and removal of a donor-estimated non-stationary
//! subspace.

mod covcsp;
mod mtcsp;
mod sscsp;

pub use covcsp::{covcsp_covariance, covcsp_train, CovCspConfig};
pub use mtcsp::{mtcsp_train, MtCspConfig, MtCspSolution, MtCspSolver};
pub use sscsp::{
    common_nonstationary_subspace, noise_only_directions, noise_only_subspace, nonstationary_directions, ss_mt_csp_train,
    ss_mt_csp_train_with_subspace, sscsp_train, sscsp_train_with_subspace, NonstationaryDirections, SsCspConfig,
    DEFAULT_SUBSPACE_PENALTY,
};

use crate::data::{ClassCovariances, ClassLabel, SubjectRecord};
use crate::error::Result;
use crate::numerics::SymMatrix;

/// The second-order statistics every transfer method reads from a subject.
#[derive(Debug, Clone)]
pub struct SubjectStats {
    pub id: String,
    pub train: ClassCovariances,
    pub test: ClassCovariances,
    pub train_pooled: SymMatrix,
    pub test_pooled: SymMatrix,
}

impl SubjectStats {
    pub fn from_record(rec: &SubjectRecord) -> Result<Self> {
        let pooled = |ts: &crate::data::TrialSet, cc: &ClassCovariances| {
            // Trial-count weighted class mean equals the all-trial scatter mean.
            let n1 = ts.class_count(ClassLabel::One) as f64;
            let n2 = ts.class_count(ClassLabel::Two) as f64;
            SymMatrix::symmetrized(
                (cc.class1().as_matrix() * n1 + cc.class2().as_matrix() * n2) / (n1 + n2),
            )
        };
        let train = ClassCovariances::from_trials(&rec.train)?;
        let test = ClassCovariances::from_trials(&rec.test)?;
        Ok(SubjectStats {
            id: rec.id.clone(),
            train_pooled: pooled(&rec.train, &train),
            test_pooled: pooled(&rec.test, &test),
            train,
            test,
        })
    }
}
