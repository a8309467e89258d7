use std::collections::HashMap;

use rayon::prelude::*;

use crate::data::load_dataset;
use crate::error::{Error, Result};
use crate::toygen::{gen_population, PopulationSpec};

use super::loso::loso_select_params;
use super::pipeline::{run_pipeline, Evaluation, Workspace};
use super::{ExperimentConfig, Method, Params, ResultRow, ResultTable};

/// LOSO-selects every configured method for `target` and evaluates it with
/// all other subjects as donors. The combined method takes `l, ν` from the
/// sscsp selection and the penalties from the mtcsp selection.
pub fn select_and_evaluate(
    ws: &Workspace<'_>,
    cfg: &ExperimentConfig,
    target: usize,
) -> Result<Vec<(Method, Params, Evaluation)>> {
    let donors: Vec<usize> = (0..ws.len()).filter(|&i| i != target).collect();
    let mut selected: HashMap<Method, Params> = HashMap::new();
    let mut select = |method: Method| -> Result<Params> {
        if let Some(p) = selected.get(&method) {
            return Ok(*p);
        }
        let p = loso_select_params(ws, &cfg.method_spec(method), target)
            .map_err(|e| e.context(format!("selecting {method} for subject {}", ws.record(target).id)))?;
        selected.insert(method, p);
        Ok(p)
    };
    let mut out = Vec::with_capacity(cfg.methods.len());
    for spec in &cfg.methods {
        let params = match spec.method {
            Method::Csp => Params::None,
            Method::SsMtCsp => match (select(Method::SsCsp)?, select(Method::MtCsp)?) {
                (Params::Subspace { l, nu }, Params::MultiTask { global, specific }) => {
                    Params::Combined { l, nu, global, specific }
                }
                other => unreachable!("selections of the wrong kind: {other:?}"),
            },
            m => select(m)?,
        };
        let donor_slice: &[usize] = if spec.method.needs_donors() { &donors } else { &[] };
        out.push((spec.method, params, run_pipeline(ws, spec.method, target, donor_slice, params)?));
    }
    Ok(out)
}

fn workspace<'a>(records: &'a [crate::data::SubjectRecord], cfg: &ExperimentConfig) -> Result<Workspace<'a>> {
    Ok(Workspace::new(records, cfg.m)?.with_mtcsp_solver(cfg.method_spec(Method::MtCsp).solver))
}

fn with_group(eta: f64, params: Params) -> String {
    let rest = params.to_string();
    if rest.is_empty() {
        format!("eta={eta}")
    } else {
        format!("eta={eta};{rest}")
    }
}

/// For each repetition `r` and each η, generates the population with seed
/// `seed + r` and evaluates subject 1 (the perturbation reference). Rows
/// are ordered by repetition, then η, then configured method.
pub fn run_toy_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let toy = cfg
        .toy
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("experiment has no toy study".into()))?;
    let per_rep = (0..cfg.repetitions)
        .into_par_iter()
        .map(|rep| -> Result<Vec<ResultRow>> {
            let mut rows = Vec::new();
            for &eta in &toy.eta {
                let pop = PopulationSpec {
                    n_subjects: toy.n_subjects,
                    eta,
                    perturb: toy.perturb,
                    mode: toy.mode,
                    seed: cfg.seed.wrapping_add(rep as u64),
                };
                let (records, _) = gen_population(&toy.spec, &pop)?;
                let ws = workspace(&records, cfg)?;
                for (method, params, e) in select_and_evaluate(&ws, cfg, 0)
                    .map_err(|err| err.context(format!("repetition {rep}, eta {eta}")))?
                {
                    rows.push(ResultRow {
                        subject: records[0].id.clone(),
                        method,
                        params: with_group(eta, params),
                        train_acc: e.train_accuracy,
                        test_acc: e.test_accuracy,
                        repetition: rep,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResultTable {
        rows: per_rep.into_iter().flatten().collect(),
    })
}

/// Every subject of the dataset in turn is the target. Repetitions rerun
/// the identical deterministic evaluation.
pub fn run_real_experiment(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let dir = cfg
        .dataset
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("experiment has no dataset path".into()))?;
    let records = load_dataset(dir)?;
    let ws = workspace(&records, cfg)?;
    let mut rows = Vec::new();
    for rep in 0..cfg.repetitions {
        for target in 0..ws.len() {
            for (method, params, e) in select_and_evaluate(&ws, cfg, target)? {
                rows.push(ResultRow {
                    subject: records[target].id.clone(),
                    method,
                    params: params.to_string(),
                    train_acc: e.train_accuracy,
                    test_acc: e.test_accuracy,
                    repetition: rep,
                });
            }
        }
    }
    Ok(ResultTable { rows })
}
