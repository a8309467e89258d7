use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::paired_permutation_test;

use super::Method;

pub const CSV_HEADER: &str = "subject,method,params,train_acc,test_acc,repetition";

/// Parameter token that names the population a row belongs to.
const GROUP_KEY: &str = "eta";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub subject: String,
    pub method: Method,
    pub params: String,
    pub train_acc: f64,
    pub test_acc: f64,
    pub repetition: usize,
}

impl ResultRow {
    /// The `eta=…` token, or `""` for rows without one.
    pub fn group(&self) -> &str {
        split_params(&self.params).0
    }
}

/// Splits `eta=0.5;lambda=0.3` into the group token and the rest.
pub fn split_params(params: &str) -> (&str, String) {
    let mut group = "";
    let mut rest = Vec::new();
    for token in params.split(';').filter(|t| !t.is_empty()) {
        if token.split('=').next() == Some(GROUP_KEY) {
            group = token;
        } else {
            rest.push(token);
        }
    }
    (group, rest.join(";"))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let body = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
            .expect("csv output is utf-8");
        Ok(format!("{CSV_HEADER}\n{body}"))
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<&str> = r.headers()?.iter().collect();
        if header.join(",") != CSV_HEADER {
            return Err(Error::InvalidParameter(format!("unexpected results header {:?}", header.join(","))));
        }
        let rows = r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?;
        Ok(ResultTable { rows })
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?).map_err(|e| Error::from(e).context(path.display().to_string()))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        Self::from_csv_str(&text).map_err(|e| e.context(path.display().to_string()))
    }

    /// Group tokens in order of first appearance.
    pub fn groups(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for row in &self.rows {
            if !out.contains(&row.group()) {
                out.push(row.group());
            }
        }
        out
    }

    /// Methods in order of first appearance.
    pub fn methods(&self) -> Vec<Method> {
        let mut out = Vec::new();
        for row in &self.rows {
            if !out.contains(&row.method) {
                out.push(row.method);
            }
        }
        out
    }
}

/// Test accuracies of `a` and `b` paired by (subject, repetition) within
/// `group`, in key order. Unpaired rows are dropped.
pub fn paired_scores(table: &ResultTable, a: Method, b: Method, group: &str) -> (Vec<f64>, Vec<f64>) {
    let collect = |m: Method| -> BTreeMap<(String, usize), f64> {
        table
            .rows
            .iter()
            .filter(|r| r.method == m && r.group() == group)
            .map(|r| ((r.subject.clone(), r.repetition), r.test_acc))
            .collect()
    };
    let (ma, mb) = (collect(a), collect(b));
    ma.iter()
        .filter_map(|(k, va)| mb.get(k).map(|vb| (*va, *vb)))
        .unzip()
}

/// Linear interpolation between order statistics (`(n−1)·q` rank).
/// `sorted` must be ascending and nonempty.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation; 0 for a single row.
    pub std: f64,
}

/// One-sided permutation-test p-values on test accuracy: entry `[i][j]`
/// tests whether `methods[i]` beats `methods[j]`. `null` on the diagonal
/// and where no rows pair up.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueMatrix {
    pub methods: Vec<Method>,
    pub p_values: Vec<Vec<Option<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub methods: Vec<MethodSummary>,
    pub comparisons: PValueMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub groups: Vec<GroupSummary>,
}

/// Error-rate quantiles per (group, method).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub group: String,
    pub method: Method,
    pub n: usize,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn summarize(table: &ResultTable) -> Result<Summary> {
    let methods = table.methods();
    let mut groups = Vec::new();
    for group in table.groups() {
        let mut summaries = Vec::new();
        for &m in &methods {
            let acc: Vec<f64> = table
                .rows
                .iter()
                .filter(|r| r.method == m && r.group() == group)
                .map(|r| r.test_acc)
                .collect();
            if acc.is_empty() {
                continue;
            }
            let n = acc.len();
            let mean = acc.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (acc.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            summaries.push(MethodSummary {
                method: m,
                n,
                mean,
                median: quantile(&sorted(acc), 0.5),
                std,
            });
        }
        let present: Vec<Method> = summaries.iter().map(|s| s.method).collect();
        let mut p_values = vec![vec![None; present.len()]; present.len()];
        for i in 0..present.len() {
            for j in 0..present.len() {
                let (a, b) = paired_scores(table, present[i], present[j], group);
                if i != j && !a.is_empty() {
                    p_values[i][j] = Some(paired_permutation_test(&a, &b)?.p_value);
                }
            }
        }
        groups.push(GroupSummary {
            group: group.to_string(),
            methods: summaries,
            comparisons: PValueMatrix { methods: present, p_values },
        });
    }
    Ok(Summary { groups })
}

pub fn error_quantiles(table: &ResultTable) -> Vec<QuantileRow> {
    let mut out = Vec::new();
    for group in table.groups() {
        for m in table.methods() {
            let err: Vec<f64> = table
                .rows
                .iter()
                .filter(|r| r.method == m && r.group() == group)
                .map(|r| 1.0 - r.test_acc)
                .collect();
            if err.is_empty() {
                continue;
            }
            let s = sorted(err);
            out.push(QuantileRow {
                group: group.to_string(),
                method: m,
                n: s.len(),
                min: s[0],
                q25: quantile(&s, 0.25),
                median: quantile(&s, 0.5),
                q75: quantile(&s, 0.75),
                max: s[s.len() - 1],
            });
        }
    }
    out
}

/// Writes `results.csv`, `summary.json` and `quantiles.csv` into `dir`.
pub fn emit_report(table: &ResultTable, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::from(e).context(dir.display().to_string()))?;
    table.write_csv(&dir.join("results.csv"))?;
    let summary = summarize(table)?;
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    let mut w = csv::Writer::from_path(dir.join("quantiles.csv"))?;
    for row in error_quantiles(table) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
