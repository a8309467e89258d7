use std::cell::RefCell;
use std::collections::HashMap;

use crate::classify::lda_train;
use crate::csp::{csp_train, SpatialFilterBank};
use crate::data::{ClassCovariances, SubjectRecord};
use crate::error::{Error, Result};
use crate::numerics::OrthonormalBasis;
use crate::transfer::{
    common_nonstationary_subspace, covcsp_train, mtcsp_train, noise_only_directions, nonstationary_directions,
    ss_mt_csp_train_with_subspace, sscsp_train_with_subspace, CovCspConfig, MtCspConfig, MtCspSolver,
    NonstationaryDirections, SsCspConfig, SubjectStats, DEFAULT_SUBSPACE_PENALTY,
};

use super::{Method, Params};

/// Accuracies of one trained pipeline on the target's two sessions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum DirectionKind {
    Session,
    NoiseOnly,
}

type MtKey = (Vec<usize>, u64, u64);

/// A fixed population with its per-subject statistics and the caches the
/// pipelines share. Subjects are addressed by index.
///
/// mtCSP solutions are cached per subject set, so every pseudo-target drawn
/// from the same set reuses one joint solve; subjects always enter the
/// solver in index order, which makes that reuse exact.
pub struct Workspace<'a> {
    records: &'a [SubjectRecord],
    stats: Vec<SubjectStats>,
    own_csp: Vec<SpatialFilterBank>,
    m: usize,
    solver: MtCspSolver,
    mt_cache: RefCell<HashMap<MtKey, Vec<SpatialFilterBank>>>,
    directions: RefCell<HashMap<(usize, usize, DirectionKind), NonstationaryDirections>>,
}

impl<'a> Workspace<'a> {
    pub fn new(records: &'a [SubjectRecord], m: usize) -> Result<Self> {
        if let Some(first) = records.first() {
            for r in records {
                if r.channels() != first.channels() {
                    return Err(Error::mismatch(format!("channels of subject {}", r.id), first.channels(), r.channels()));
                }
            }
        }
        let stats = records
            .iter()
            .map(|r| SubjectStats::from_record(r).map_err(|e| e.context(format!("subject {}", r.id))))
            .collect::<Result<Vec<_>>>()?;
        let own_csp = stats
            .iter()
            .map(|s| csp_train(s.train.class1(), s.train.class2(), m).map_err(|e| e.context(format!("csp on subject {}", s.id))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Workspace {
            records,
            stats,
            own_csp,
            m,
            solver: MtCspSolver::default(),
            mt_cache: RefCell::default(),
            directions: RefCell::default(),
        })
    }

    pub fn with_mtcsp_solver(mut self, solver: MtCspSolver) -> Self {
        self.solver = solver;
        self
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn record(&self, i: usize) -> &SubjectRecord {
        &self.records[i]
    }

    pub fn stats(&self, i: usize) -> &SubjectStats {
        &self.stats[i]
    }

    pub fn filters_per_class(&self) -> usize {
        self.m
    }

    fn directions(&self, subject: usize, l: usize, kind: DirectionKind) -> Result<NonstationaryDirections> {
        let key = (subject, l, kind);
        if let Some(d) = self.directions.borrow().get(&key) {
            return Ok(d.clone());
        }
        let cfg = SsCspConfig::new(l, 1)?;
        let d = match kind {
            DirectionKind::Session => nonstationary_directions(&self.stats[subject], &cfg)?,
            DirectionKind::NoiseOnly => noise_only_directions(&self.stats[subject], &cfg, self.m)?,
        };
        self.directions.borrow_mut().insert(key, d.clone());
        Ok(d)
    }

    fn common_subspace(&self, donors: &[usize], l: usize, nu: usize, kind: DirectionKind) -> Result<OrthonormalBasis> {
        if nu > l * donors.len() {
            return Err(Error::InvalidParameter(format!("nu={nu} exceeds l·donors = {l}·{}", donors.len())));
        }
        let dirs = donors
            .iter()
            .map(|&d| self.directions(d, l, kind))
            .collect::<Result<Vec<_>>>()?;
        common_nonstationary_subspace(&dirs, nu)
    }

    fn mtcsp_bank(&self, target: usize, donors: &[usize], global: f64, specific: f64) -> Result<SpatialFilterBank> {
        let mut members: Vec<usize> = donors.iter().copied().chain([target]).collect();
        members.sort_unstable();
        let position = members.binary_search(&target).expect("target is a member");
        let key = (members, global.to_bits(), specific.to_bits());
        if let Some(banks) = self.mt_cache.borrow().get(&key) {
            return Ok(banks[position].clone());
        }
        let cfg = MtCspConfig::new(global, specific)?.with_solver(self.solver);
        let covs: Vec<&ClassCovariances> = key.0.iter().map(|&i| &self.stats[i].train).collect();
        let init: Vec<&SpatialFilterBank> = key.0.iter().map(|&i| &self.own_csp[i]).collect();
        let banks = mtcsp_train(&covs, &cfg, self.m, &init)?.banks;
        let bank = banks[position].clone();
        self.mt_cache.borrow_mut().insert(key, banks);
        Ok(bank)
    }

    /// Filters of `method` for `target` learned with `donors`.
    pub fn filters(&self, method: Method, target: usize, donors: &[usize], params: Params) -> Result<SpatialFilterBank> {
        let mismatch = || Error::InvalidParameter(format!("parameters {params:?} do not belong to {method}"));
        let t = &self.stats[target];
        let donor_train = || donors.iter().map(|&d| &self.stats[d].train).collect::<Vec<_>>();
        match (method, params) {
            (Method::Csp, Params::None) => Ok(self.own_csp[target].clone()),
            (Method::CovCsp, Params::Shrinkage { lambda }) => {
                covcsp_train(&t.train, &donor_train(), CovCspConfig::new(lambda)?, self.m)
            }
            (Method::MtCsp, Params::MultiTask { global, specific }) => self.mtcsp_bank(target, donors, global, specific),
            (Method::SsCsp, Params::Subspace { l, nu }) => {
                let subspace = self.common_subspace(donors, l, nu, DirectionKind::Session)?;
                sscsp_train_with_subspace(&t.train, &subspace, DEFAULT_SUBSPACE_PENALTY, self.m)
            }
            (Method::SsCspNoiseOnly, Params::Subspace { l, nu }) => {
                let subspace = self.common_subspace(donors, l, nu, DirectionKind::NoiseOnly)?;
                sscsp_train_with_subspace(&t.train, &subspace, DEFAULT_SUBSPACE_PENALTY, self.m)
            }
            (Method::SsMtCsp, Params::Combined { l, nu, global, specific }) => {
                let subspace = self.common_subspace(donors, l, nu, DirectionKind::Session)?;
                let cfg = MtCspConfig::new(global, specific)?.with_solver(self.solver);
                ss_mt_csp_train_with_subspace(&t.train, &donor_train(), &subspace, &cfg, self.m)
            }
            _ => Err(mismatch()),
        }
    }
}

/// Trains `method` on the target's training session (plus donors), fits
/// LDA on the training features and scores both sessions.
pub fn run_pipeline(ws: &Workspace<'_>, method: Method, target: usize, donors: &[usize], params: Params) -> Result<Evaluation> {
    let context = || format!("{method} [{params}] on subject {}", ws.record(target).id);
    check_roles(ws, method, target, donors).map_err(|e| e.context(context()))?;
    let evaluate = || -> Result<Evaluation> {
        let bank = ws.filters(method, target, donors, params)?;
        let rec = ws.record(target);
        let train_features = bank.features(&rec.train)?;
        let lda = lda_train(&train_features, rec.train.labels())?;
        Ok(Evaluation {
            train_accuracy: lda.accuracy(&train_features, rec.train.labels())?,
            test_accuracy: lda.accuracy(&bank.features(&rec.test)?, rec.test.labels())?,
        })
    };
    evaluate().map_err(|e| e.context(context()))
}

fn check_roles(ws: &Workspace<'_>, method: Method, target: usize, donors: &[usize]) -> Result<()> {
    if target >= ws.len() {
        return Err(Error::InvalidParameter(format!("target index {target} out of range")));
    }
    if method.needs_donors() && donors.is_empty() {
        return Err(Error::NoDonors(method.name().into()));
    }
    for (k, &d) in donors.iter().enumerate() {
        if d >= ws.len() || d == target || donors[..k].contains(&d) {
            return Err(Error::InvalidParameter(format!("invalid donor index {d} for target {target}")));
        }
    }
    Ok(())
}
