//! Covariance shrinkage toward the donor average before CSP.

use crate::csp::{csp_train, SpatialFilterBank};
use crate::data::ClassCovariances;
use crate::error::{Error, Result};
use crate::numerics::{check_same_dim, SymMatrix};

/// Shrinkage weight toward the donor mean, in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovCspConfig {
    lambda: f64,
}

impl CovCspConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!("shrinkage weight must lie in [0, 1], got {lambda}")));
        }
        Ok(CovCspConfig { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// `(1 − λ)·Σ_target + λ·mean(Σ_donors)`. Donors may be empty only at `λ = 0`.
pub fn covcsp_covariance(target: &SymMatrix, donors: &[&SymMatrix], cfg: CovCspConfig) -> Result<SymMatrix> {
    let lambda = cfg.lambda;
    if donors.is_empty() {
        if lambda == 0.0 {
            return Ok(target.clone());
        }
        return Err(Error::NoDonors("covcsp".into()));
    }
    let mut mean = target.as_matrix() * 0.0;
    for d in donors {
        check_same_dim(target, d, "donor covariance")?;
        mean += d.as_matrix();
    }
    mean /= donors.len() as f64;
    Ok(SymMatrix::symmetrized(target.as_matrix() * (1.0 - lambda) + mean * lambda))
}

/// CSP on both class covariances after shrinkage toward the donors.
pub fn covcsp_train(
    target: &ClassCovariances,
    donors: &[&ClassCovariances],
    cfg: CovCspConfig,
    m: usize,
) -> Result<SpatialFilterBank> {
    let blend = |pick: fn(&ClassCovariances) -> &SymMatrix| {
        let others: Vec<&SymMatrix> = donors.iter().map(|d| pick(d)).collect();
        covcsp_covariance(pick(target), &others, cfg)
    };
    let s1 = blend(ClassCovariances::class1)?;
    let s2 = blend(ClassCovariances::class2)?;
    csp_train(&s1, &s2, m)
}
