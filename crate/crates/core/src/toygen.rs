//! Synthetic multi-subject population. Every sample is
//!
//! ```text
//! x(t) = A·[s_dis; s_ndis] + B·[s_stat; s_nstat]
//! ```
//!
//! with independent zero-mean Gaussian sources. `s_dis` carries the class
//! information, `s_nstat` changes variance between sessions, and the
//! rotations `A`, `B` set where those subspaces sit in channel space.
//! Perturbing one rotation across subjects controls how dissimilar the
//! discriminative or the non-stationary subspaces are.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{ClassLabel, Session, SubjectRecord, TrialSet};
use crate::error::{Error, Result};
use crate::numerics::{derive_seed, perturb_rotation_sample, rand_rotation, Matrix, OrthonormalBasis, RotationSample};

/// Default dissimilarity grid.
pub const DEFAULT_ETA_GRID: [f64; 6] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];

/// Source counts and variances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToySpec {
    pub d_dis: usize,
    pub d_ndis: usize,
    pub d_stat: usize,
    pub d_nstat: usize,
    pub var_dis_class1: f64,
    pub var_dis_class2: f64,
    /// How many of the discriminative sources (the last ones) have the two
    /// class variances swapped.
    pub dis_class2_sources: usize,
    pub var_ndis: f64,
    pub var_stat: f64,
    pub var_nstat_train: f64,
    pub var_nstat_test: f64,
    pub trials_per_class: usize,
    pub samples_per_trial: usize,
}

impl Default for ToySpec {
    fn default() -> Self {
        ToySpec {
            d_dis: 6,
            d_ndis: 74,
            d_stat: 75,
            d_nstat: 5,
            var_dis_class1: 0.8,
            var_dis_class2: 0.1,
            dis_class2_sources: 0,
            var_ndis: 0.1,
            var_stat: 1.0,
            var_nstat_train: 1.0,
            var_nstat_test: 3.0,
            trials_per_class: 100,
            samples_per_trial: 100,
        }
    }
}

impl ToySpec {
    pub fn channels(&self) -> usize {
        self.d_dis + self.d_ndis
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.channels();
        if c == 0 || c != self.d_stat + self.d_nstat {
            return Err(Error::InvalidParameter(format!(
                "d_dis + d_ndis = {c} must equal d_stat + d_nstat = {} and be positive",
                self.d_stat + self.d_nstat
            )));
        }
        if self.dis_class2_sources > self.d_dis {
            return Err(Error::InvalidParameter(format!(
                "{} swapped sources exceed {} discriminative sources",
                self.dis_class2_sources, self.d_dis
            )));
        }
        let variances = [
            self.var_dis_class1,
            self.var_dis_class2,
            self.var_ndis,
            self.var_stat,
            self.var_nstat_train,
            self.var_nstat_test,
        ];
        if variances.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter("source variances must be positive and finite".into()));
        }
        if self.trials_per_class == 0 || self.samples_per_trial == 0 {
            return Err(Error::InvalidParameter("need at least one trial per class and one sample".into()));
        }
        Ok(())
    }

    /// Variance of discriminative source `k` under `class`.
    fn dis_variance(&self, k: usize, class: ClassLabel) -> f64 {
        let swapped = k >= self.d_dis - self.dis_class2_sources;
        match (class, swapped) {
            (ClassLabel::One, false) | (ClassLabel::Two, true) => self.var_dis_class1,
            _ => self.var_dis_class2,
        }
    }

    fn nstat_variance(&self, session: Session) -> f64 {
        match session {
            Session::Train => self.var_nstat_train,
            Session::Test => self.var_nstat_test,
        }
    }

    /// Per-source variances of the `A` sources (class-averaged for `None`)
    /// and the `B` sources.
    pub fn source_variances(&self, class: Option<ClassLabel>, session: Session) -> (Vec<f64>, Vec<f64>) {
        let dis = (0..self.d_dis).map(|k| match class {
            Some(c) => self.dis_variance(k, c),
            None => (self.dis_variance(k, ClassLabel::One) + self.dis_variance(k, ClassLabel::Two)) / 2.0,
        });
        let a = dis.chain(std::iter::repeat(self.var_ndis).take(self.d_ndis)).collect();
        let b = std::iter::repeat(self.var_stat)
            .take(self.d_stat)
            .chain(std::iter::repeat(self.nstat_variance(session)).take(self.d_nstat))
            .collect();
        (a, b)
    }
}

/// Which rotation differs between subject 1 and the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerturbTarget {
    A,
    B,
    #[serde(rename = "both")]
    Both,
    #[serde(rename = "none")]
    None,
}

impl PerturbTarget {
    fn perturbs_a(self) -> bool {
        matches!(self, PerturbTarget::A | PerturbTarget::Both)
    }

    fn perturbs_b(self) -> bool {
        matches!(self, PerturbTarget::B | PerturbTarget::Both)
    }
}

impl std::str::FromStr for PerturbTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(PerturbTarget::A),
            "B" | "b" => Ok(PerturbTarget::B),
            "both" => Ok(PerturbTarget::Both),
            "none" => Ok(PerturbTarget::None),
            other => Err(Error::InvalidParameter(format!("perturbation target must be A, B, both or none, got {other:?}"))),
        }
    }
}

impl std::fmt::Display for PerturbTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PerturbTarget::A => "A",
            PerturbTarget::B => "B",
            PerturbTarget::Both => "both",
            PerturbTarget::None => "none",
        })
    }
}

/// How the other subjects' perturbed rotations are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbMode {
    /// One perturbed rotation shared by all other subjects.
    #[default]
    Shared,
    /// An independent perturbation per subject.
    PerSubject,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub n_subjects: usize,
    pub eta: f64,
    pub perturb: PerturbTarget,
    #[serde(default)]
    pub mode: PerturbMode,
    pub seed: u64,
}

impl PopulationSpec {
    pub fn new(n_subjects: usize, eta: f64, perturb: PerturbTarget, seed: u64) -> Self {
        PopulationSpec {
            n_subjects,
            eta,
            perturb,
            mode: PerturbMode::Shared,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectTruth {
    pub a: RotationSample,
    pub b: RotationSample,
}

/// The mixing rotations behind a generated population.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub subjects: Vec<SubjectTruth>,
    d_dis: usize,
    d_stat: usize,
}

impl GroundTruth {
    /// `A·span{e₁ … e_d_dis}`.
    pub fn discriminative_span(&self, subject: usize) -> OrthonormalBasis {
        let a = &self.subjects[subject].a.rotation;
        OrthonormalBasis::new(a.columns(0, self.d_dis).into_owned()).expect("rotation columns are orthonormal")
    }

    /// `B·span{last d_nstat axes}`.
    pub fn nonstationary_span(&self, subject: usize) -> OrthonormalBasis {
        let b = &self.subjects[subject].b.rotation;
        let n = b.ncols() - self.d_stat;
        OrthonormalBasis::new(b.columns(self.d_stat, n).into_owned()).expect("rotation columns are orthonormal")
    }
}

/// One session of `2·trials_per_class` trials, labels alternating from
/// class 1, deterministic in `seed`.
pub fn gen_subject_session(spec: &ToySpec, a: &Matrix, b: &Matrix, session: Session, seed: u64) -> Result<TrialSet> {
    spec.validate()?;
    let c = spec.channels();
    for (name, m) in [("A", a), ("B", b)] {
        if m.nrows() != c || m.ncols() != c {
            return Err(Error::mismatch(format!("mixing matrix {name}"), c, if m.nrows() != c { m.nrows() } else { m.ncols() }));
        }
    }
    let n = 2 * spec.trials_per_class;
    let t = spec.samples_per_trial;
    let labels: Vec<ClassLabel> = (0..n).map(|i| if i % 2 == 0 { ClassLabel::One } else { ClassLabel::Two }).collect();
    let sd = |v: f64| v.sqrt();
    let dis_sd: Vec<[f64; 2]> = (0..spec.d_dis)
        .map(|k| [sd(spec.dis_variance(k, ClassLabel::One)), sd(spec.dis_variance(k, ClassLabel::Two))])
        .collect();
    let ndis_sd = sd(spec.var_ndis);
    let stat_sd = sd(spec.var_stat);
    let nstat_sd = sd(spec.nstat_variance(session));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources_a = Matrix::from_fn(c, n * t, |r, col| {
        let z: f64 = rng.sample(StandardNormal);
        let scale = if r < spec.d_dis {
            dis_sd[r][usize::from(labels[col / t] == ClassLabel::Two)]
        } else {
            ndis_sd
        };
        scale * z
    });
    let sources_b = Matrix::from_fn(c, n * t, |r, _| {
        let z: f64 = rng.sample(StandardNormal);
        if r < spec.d_stat { stat_sd * z } else { nstat_sd * z }
    });
    let data = a * sources_a + b * sources_b;
    TrialSet::from_concatenated(data, t, labels)
}

/// Subject 1 gets the base rotations; the others get the designated
/// rotation(s) perturbed by `eta` and share the rest exactly.
pub fn gen_population(spec: &ToySpec, pop: &PopulationSpec) -> Result<(Vec<SubjectRecord>, GroundTruth)> {
    spec.validate()?;
    if pop.n_subjects == 0 {
        return Err(Error::InvalidParameter("population needs at least one subject".into()));
    }
    let c = spec.channels();
    let base_a = rand_rotation(c, derive_seed(pop.seed, 1))?;
    let base_b = rand_rotation(c, derive_seed(pop.seed, 2))?;
    let perturbed = |base: &RotationSample, subject: usize, which: u64| -> Result<RotationSample> {
        let stream = match pop.mode {
            PerturbMode::Shared => 3 + which,
            PerturbMode::PerSubject => 16 + 2 * subject as u64 + which,
        };
        perturb_rotation_sample(&base.generator, pop.eta, derive_seed(pop.seed, stream))
    };
    let mut truths = Vec::with_capacity(pop.n_subjects);
    for i in 0..pop.n_subjects {
        let a = if i > 0 && pop.perturb.perturbs_a() { perturbed(&base_a, i, 0)? } else { base_a.clone() };
        let b = if i > 0 && pop.perturb.perturbs_b() { perturbed(&base_b, i, 1)? } else { base_b.clone() };
        truths.push(SubjectTruth { a, b });
    }
    let records = truths
        .iter()
        .enumerate()
        .map(|(i, truth)| {
            let session = |s: Session, k: u64| {
                gen_subject_session(spec, &truth.a.rotation, &truth.b.rotation, s, derive_seed(pop.seed, 1000 + 2 * i as u64 + k))
            };
            SubjectRecord::new(format!("S{}", i + 1), session(Session::Train, 0)?, session(Session::Test, 1)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        records,
        GroundTruth {
            subjects: truths,
            d_dis: spec.d_dis,
            d_stat: spec.d_stat,
        },
    ))
}
