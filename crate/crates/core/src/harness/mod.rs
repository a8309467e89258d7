//! Experiment orchestration: method pipelines, leave-one-subject-out
//! parameter selection, toy sweeps and result files.

mod loso;
mod pipeline;
mod report;
mod toy;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::csp::DEFAULT_FILTERS_PER_CLASS;
use crate::error::{Error, Result};
use crate::toygen::{PerturbMode, PerturbTarget, ToySpec, DEFAULT_ETA_GRID};
use crate::transfer::MtCspSolver;

pub use loso::{loso_select_params, LOSO_MIN_SUBJECTS};
pub use pipeline::{run_pipeline, Evaluation, Workspace};
pub use report::{
    emit_report, error_quantiles, paired_scores, quantile, split_params, summarize, GroupSummary, MethodSummary,
    PValueMatrix, QuantileRow, ResultRow, ResultTable, Summary, CSV_HEADER,
};
pub use toy::{run_real_experiment, run_toy_experiment, select_and_evaluate};

/// The six feature extraction pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "csp")]
    Csp,
    #[serde(rename = "covcsp")]
    CovCsp,
    #[serde(rename = "mtcsp")]
    MtCsp,
    #[serde(rename = "sscsp")]
    SsCsp,
    #[serde(rename = "ss+mtcsp")]
    SsMtCsp,
    #[serde(rename = "sscsp-noise-only")]
    SsCspNoiseOnly,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Csp,
        Method::CovCsp,
        Method::MtCsp,
        Method::SsCsp,
        Method::SsMtCsp,
        Method::SsCspNoiseOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Csp => "csp",
            Method::CovCsp => "covcsp",
            Method::MtCsp => "mtcsp",
            Method::SsCsp => "sscsp",
            Method::SsMtCsp => "ss+mtcsp",
            Method::SsCspNoiseOnly => "sscsp-noise-only",
        }
    }

    pub fn needs_donors(self) -> bool {
        self != Method::Csp
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

/// One point of a method's parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Params {
    None,
    Shrinkage { lambda: f64 },
    MultiTask { global: f64, specific: f64 },
    Subspace { l: usize, nu: usize },
    Combined { l: usize, nu: usize, global: f64, specific: f64 },
}

impl Params {
    /// `key=value` pairs in output order.
    pub fn tokens(&self) -> Vec<(&'static str, String)> {
        match *self {
            Params::None => vec![],
            Params::Shrinkage { lambda } => vec![("lambda", lambda.to_string())],
            Params::MultiTask { global, specific } => {
                vec![("lambda1", global.to_string()), ("lambda2", specific.to_string())]
            }
            Params::Subspace { l, nu } => vec![("l", l.to_string()), ("nu", nu.to_string())],
            Params::Combined { l, nu, global, specific } => vec![
                ("l", l.to_string()),
                ("nu", nu.to_string()),
                ("lambda1", global.to_string()),
                ("lambda2", specific.to_string()),
            ],
        }
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.tokens().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(";"))
    }
}

/// Shrinkage weights 0, 1e-5 … 1e-2, 0.1, 0.2 … 1.
pub fn default_shrinkage_grid() -> Vec<f64> {
    let mut grid = vec![0.0, 1e-5, 1e-4, 1e-3, 1e-2];
    grid.extend((1..=10).map(|k| k as f64 / 10.0));
    grid
}

/// Decades 1e-4 … 1e4.
pub fn default_penalty_grid() -> Vec<f64> {
    (-4..=4).map(|e| 10f64.powi(e)).collect()
}

/// A method with its (possibly overridden) parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "MethodSpecRepr", into = "MethodSpecFull")]
pub struct MethodSpec {
    pub method: Method,
    pub lambdas: Vec<f64>,
    pub global_penalties: Vec<f64>,
    pub specific_penalties: Vec<f64>,
    pub subspace_dims: Vec<usize>,
    pub subspace_counts: Vec<usize>,
    pub solver: MtCspSolver,
}

impl MethodSpec {
    /// The default grids for `method`.
    pub fn new(method: Method) -> Self {
        MethodSpec {
            method,
            lambdas: default_shrinkage_grid(),
            global_penalties: default_penalty_grid(),
            specific_penalties: default_penalty_grid(),
            subspace_dims: (1..=8).collect(),
            subspace_counts: (1..=10).collect(),
            solver: MtCspSolver::default(),
        }
    }

    /// Grid in canonical order for pipelines that see `donors` donors.
    /// Subspace points with `nu > l·donors` are dropped. The combined method
    /// has no grid of its own; its single point is assembled from the
    /// subspace and multi-task selections.
    pub fn grid(&self, donors: usize) -> Result<Vec<Params>> {
        let grid: Vec<Params> = match self.method {
            Method::Csp => vec![Params::None],
            Method::CovCsp => self.lambdas.iter().map(|&lambda| Params::Shrinkage { lambda }).collect(),
            Method::MtCsp => self
                .global_penalties
                .iter()
                .flat_map(|&global| self.specific_penalties.iter().map(move |&specific| Params::MultiTask { global, specific }))
                .collect(),
            Method::SsCsp | Method::SsCspNoiseOnly => self
                .subspace_dims
                .iter()
                .flat_map(|&l| {
                    self.subspace_counts
                        .iter()
                        .filter(move |&&nu| nu <= l * donors)
                        .map(move |&nu| Params::Subspace { l, nu })
                })
                .collect(),
            Method::SsMtCsp => {
                return Err(Error::InvalidParameter(
                    "ss+mtcsp reuses the sscsp and mtcsp selections and has no grid".into(),
                ))
            }
        };
        if grid.is_empty() {
            return Err(Error::InvalidParameter(format!("{} parameter grid is empty", self.method)));
        }
        Ok(grid)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MethodSpecRepr {
    Name(Method),
    Full(MethodSpecFull),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MethodSpecFull {
    name: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambdas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    global_penalties: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    specific_penalties: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subspace_dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    subspace_counts: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    solver: Option<MtCspSolver>,
}

impl From<MethodSpecRepr> for MethodSpec {
    fn from(repr: MethodSpecRepr) -> Self {
        match repr {
            MethodSpecRepr::Name(method) => MethodSpec::new(method),
            MethodSpecRepr::Full(full) => {
                let d = MethodSpec::new(full.name);
                MethodSpec {
                    method: full.name,
                    lambdas: full.lambdas.unwrap_or(d.lambdas),
                    global_penalties: full.global_penalties.unwrap_or(d.global_penalties),
                    specific_penalties: full.specific_penalties.unwrap_or(d.specific_penalties),
                    subspace_dims: full.subspace_dims.unwrap_or(d.subspace_dims),
                    subspace_counts: full.subspace_counts.unwrap_or(d.subspace_counts),
                    solver: full.solver.unwrap_or(d.solver),
                }
            }
        }
    }
}

impl From<MethodSpec> for MethodSpecFull {
    fn from(s: MethodSpec) -> Self {
        MethodSpecFull {
            name: s.method,
            lambdas: Some(s.lambdas),
            global_penalties: Some(s.global_penalties),
            specific_penalties: Some(s.specific_penalties),
            subspace_dims: Some(s.subspace_dims),
            subspace_counts: Some(s.subspace_counts),
            solver: Some(s.solver),
        }
    }
}

/// Synthetic population sweep: one population per (repetition, η).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyStudy {
    #[serde(default)]
    pub spec: ToySpec,
    #[serde(default = "default_subjects")]
    pub n_subjects: usize,
    pub perturb: PerturbTarget,
    #[serde(default)]
    pub mode: PerturbMode,
    #[serde(default = "default_eta_grid")]
    pub eta: Vec<f64>,
}

fn default_subjects() -> usize {
    5
}

fn default_eta_grid() -> Vec<f64> {
    DEFAULT_ETA_GRID.to_vec()
}

impl ToyStudy {
    pub fn new(perturb: PerturbTarget) -> Self {
        ToyStudy {
            spec: ToySpec::default(),
            n_subjects: default_subjects(),
            perturb,
            mode: PerturbMode::default(),
            eta: default_eta_grid(),
        }
    }
}

/// A sweep over methods on either a dataset directory or a toy study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toy: Option<ToyStudy>,
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_m() -> usize {
    DEFAULT_FILTERS_PER_CLASS
}

fn default_repetitions() -> usize {
    1
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidParameter("repetitions must be ≥ 1".into()));
        }
        if self.m == 0 {
            return Err(Error::InvalidParameter("filters per class must be ≥ 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods configured".into()));
        }
        let mut seen = Vec::new();
        for spec in &self.methods {
            if seen.contains(&spec.method) {
                return Err(Error::InvalidParameter(format!("method {} listed twice", spec.method)));
            }
            seen.push(spec.method);
        }
        if let Some(toy) = &self.toy {
            toy.spec.validate()?;
            if toy.eta.is_empty() || toy.eta.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
                return Err(Error::InvalidParameter("eta grid must be nonempty, finite and ≥ 0".into()));
            }
        }
        Ok(())
    }

    /// The spec configured for `method`, or its defaults.
    pub fn method_spec(&self, method: Method) -> MethodSpec {
        self.methods
            .iter()
            .find(|s| s.method == method)
            .cloned()
            .unwrap_or_else(|| MethodSpec::new(method))
    }

    pub fn from_json_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}
