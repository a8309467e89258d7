use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use csp_transfer::data::{load_dataset, save_dataset};
use csp_transfer::harness::{
    emit_report, paired_scores, run_real_experiment, run_toy_experiment, select_and_evaluate, ExperimentConfig,
    Method, MethodSpec, ResultTable, Workspace,
};
use csp_transfer::metrics::{
    paired_permutation_test, subject_similarity_report, SubspaceKind, DEFAULT_DISCRIMINATIVE_DIM,
    DEFAULT_NONSTATIONARY_DIM,
};
use csp_transfer::toygen::{gen_population, PerturbTarget, PopulationSpec, ToySpec};
use csp_transfer::transfer::SubjectStats;
use csp_transfer::{Error, Result};

#[derive(Parser)]
#[command(name = "csp-transfer", version, about = "Multi-subject CSP experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic population and save it as a dataset directory.
    GenToy {
        #[arg(long, default_value_t = 5)]
        subjects: usize,
        #[arg(long, default_value_t = 0.0)]
        eta: f64,
        /// Which mixing matrix is perturbed: A, B, both or none.
        #[arg(long, default_value = "none")]
        perturb: PerturbTarget,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Optional JSON file with generator settings (source counts and variances).
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the toy-study sweep described by a config file.
    RunToy {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured repetition count.
        #[arg(long)]
        reps: Option<usize>,
        /// Overrides the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate methods on a dataset directory, every subject as target.
    Run {
        #[arg(long)]
        data: PathBuf,
        /// Comma-separated method names; defaults to the config's methods, or all.
        #[arg(long, value_delimiter = ',')]
        methods: Vec<Method>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pairwise subspace similarity between the subjects of a dataset.
    Similarity {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "discriminative")]
        kind: SubspaceKind,
        /// Subspace dimension; 6 for discriminative, 5 for non-stationary by default.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// One-sided paired permutation test of method A against method B.
    Permtest {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        method_a: Method,
        #[arg(long)]
        method_b: Method,
    },
    /// Train each subject's filters with LOSO-selected parameters and write the patterns.
    ExportPatterns {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        method: Method,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::GenToy {
            subjects,
            eta,
            perturb,
            seed,
            spec,
            out,
        } => {
            let spec = match spec {
                Some(path) => read_json::<ToySpec>(&path)?,
                None => ToySpec::default(),
            };
            let (records, _) = gen_population(&spec, &PopulationSpec::new(subjects, eta, perturb, seed))?;
            save_dataset(&records, &out)?;
            eprintln!("wrote {subjects} subjects to {}", out.display());
            Ok(())
        }
        Command::RunToy { config, reps, out } => {
            let mut cfg = ExperimentConfig::from_json_file(&config)?;
            if let Some(reps) = reps {
                cfg.repetitions = reps;
            }
            let out = output_dir(out, &cfg)?;
            let table = run_toy_experiment(&cfg)?;
            report(&table, &out)
        }
        Command::Run {
            data,
            methods,
            config,
            out,
        } => {
            let mut cfg = base_config(config.as_deref())?;
            cfg.dataset = Some(data);
            cfg.toy = None;
            if !methods.is_empty() {
                cfg.methods = methods.into_iter().map(|m| cfg.method_spec(m)).collect();
            }
            let out = output_dir(out, &cfg)?;
            let table = run_real_experiment(&cfg)?;
            report(&table, &out)
        }
        Command::Similarity { data, kind, dim } => {
            let records = load_dataset(&data)?;
            let stats = records.iter().map(SubjectStats::from_record).collect::<Result<Vec<_>>>()?;
            let dim = dim.unwrap_or(match kind {
                SubspaceKind::Discriminative => DEFAULT_DISCRIMINATIVE_DIM,
                SubspaceKind::Nonstationary => DEFAULT_NONSTATIONARY_DIM,
            });
            print_json(&subject_similarity_report(&stats, kind, dim)?)
        }
        Command::Permtest {
            results,
            method_a,
            method_b,
        } => {
            let table = ResultTable::read_csv(&results)?;
            #[derive(Serialize)]
            struct GroupTest<'a> {
                group: &'a str,
                n: usize,
                mean_difference: f64,
                p_value: f64,
                exhaustive: bool,
            }
            let mut out = Vec::new();
            for group in table.groups() {
                let (a, b) = paired_scores(&table, method_a, method_b, group);
                if a.is_empty() {
                    continue;
                }
                let t = paired_permutation_test(&a, &b)?;
                out.push(GroupTest {
                    group,
                    n: a.len(),
                    mean_difference: t.observed_mean_difference,
                    p_value: t.p_value,
                    exhaustive: t.exhaustive,
                });
            }
            if out.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "no paired rows for {method_a} and {method_b} in {}",
                    results.display()
                )));
            }
            print_json(&out)
        }
        Command::ExportPatterns {
            data,
            method,
            config,
            out,
        } => export_patterns(&data, method, config.as_deref(), &out),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    serde_json::from_str(&text).map_err(|e| Error::from(e).context(path.display().to_string()))
}

fn base_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::from_json_file(p),
        None => Ok(ExperimentConfig {
            dataset: None,
            toy: None,
            methods: Method::ALL.iter().map(|&m| MethodSpec::new(m)).collect(),
            m: csp_transfer::csp::DEFAULT_FILTERS_PER_CLASS,
            repetitions: 1,
            seed: 0,
            output: None,
        }),
    }
}

fn output_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> Result<PathBuf> {
    flag.or_else(|| cfg.output.clone())
        .ok_or_else(|| Error::InvalidParameter("no output directory: pass --out or set `output` in the config".into()))
}

fn report(table: &ResultTable, out: &Path) -> Result<()> {
    emit_report(table, out)?;
    eprintln!("wrote {} rows to {}", table.rows.len(), out.display());
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

/// Long format: one row per (subject, filter, channel).
fn export_patterns(data: &Path, method: Method, config: Option<&Path>, out: &Path) -> Result<()> {
    let mut cfg = base_config(config)?;
    cfg.methods = vec![cfg.method_spec(method)];
    let records = load_dataset(data)?;
    let ws = Workspace::new(&records, cfg.m)?.with_mtcsp_solver(cfg.method_spec(Method::MtCsp).solver);
    let mut w = csv::Writer::from_path(out).map_err(|e| Error::from(e).context(out.display().to_string()))?;
    w.write_record(["subject", "method", "params", "filter", "channel", "pattern"])?;
    for target in 0..ws.len() {
        let (_, params, _) = select_and_evaluate(&ws, &cfg, target)?
            .into_iter()
            .next()
            .expect("one method configured");
        let donors: Vec<usize> = if method.needs_donors() {
            (0..ws.len()).filter(|&i| i != target).collect()
        } else {
            Vec::new()
        };
        let bank = ws.filters(method, target, &donors, params)?;
        let id = &records[target].id;
        let params = params.to_string();
        for (k, col) in bank.patterns().column_iter().enumerate() {
            for (c, v) in col.iter().enumerate() {
                w.write_record([id.as_str(), method.name(), &params, &k.to_string(), &c.to_string(), &v.to_string()])?;
            }
        }
    }
    w.flush()?;
    eprintln!("wrote patterns for {} subjects to {}", ws.len(), out.display());
    Ok(())
}
