//! Directory dataset format: `manifest.json` plus one raw little-endian
//! float64 file per session, trials concatenated, each trial row-major `C × T`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{ClassLabel, Session, SubjectRecord, TrialSet};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const MANIFEST_FILE: &str = "manifest.json";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    subjects: Vec<SubjectEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SubjectEntry {
    id: String,
    train: SessionEntry,
    test: SessionEntry,
}

#[derive(Debug, Serialize, Deserialize)]
struct SessionEntry {
    file: String,
    n_trials: usize,
    channels: usize,
    samples: usize,
    labels: Vec<i64>,
}

fn encode(ts: &TrialSet) -> Vec<u8> {
    let (c, t) = (ts.channels(), ts.samples_per_trial());
    let mut bytes = Vec::with_capacity(ts.n_trials() * c * t * 8);
    for i in 0..ts.n_trials() {
        let trial = ts.trial(i);
        for r in 0..c {
            for s in 0..t {
                bytes.extend_from_slice(&trial[(r, s)].to_le_bytes());
            }
        }
    }
    bytes
}

/// Writes `records` under `dir` (created if missing).
pub fn save_dataset(records: &[SubjectRecord], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut subjects = Vec::with_capacity(records.len());
    for (idx, rec) in records.iter().enumerate() {
        let entry = |session: Session| -> Result<SessionEntry> {
            let ts = rec.session(session);
            let file = format!("subject{idx:03}_{session}.f64");
            fs::write(dir.join(&file), encode(ts))?;
            Ok(SessionEntry {
                file,
                n_trials: ts.n_trials(),
                channels: ts.channels(),
                samples: ts.samples_per_trial(),
                labels: ts.labels().iter().map(|l| i64::from(l.as_int())).collect(),
            })
        };
        let train = entry(Session::Train)?;
        let test = entry(Session::Test)?;
        subjects.push(SubjectEntry {
            id: rec.id.clone(),
            train,
            test,
        });
    }
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        subjects,
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_vec_pretty(&manifest)?)?;
    Ok(())
}

fn decode(dir: &Path, entry: &SessionEntry) -> Result<TrialSet> {
    let path: PathBuf = dir.join(&entry.file);
    if entry.labels.len() != entry.n_trials {
        return Err(Error::mismatch(
            format!("{}: labels", path.display()),
            entry.n_trials,
            entry.labels.len(),
        ));
    }
    let labels = entry
        .labels
        .iter()
        .map(|&l| ClassLabel::from_int(l))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.context(path.display().to_string()))?;
    let bytes = fs::read(&path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    let (n, c, t) = (entry.n_trials, entry.channels, entry.samples);
    let expected = (n * c * t * 8) as u64;
    let found = bytes.len() as u64;
    if found != expected {
        // A whole number of channels per trial means the header disagrees
        // with the payload shape rather than the file being cut short.
        let per_channel = (n * t * 8) as u64;
        if per_channel > 0 && found > 0 && found % per_channel == 0 {
            return Err(Error::mismatch(
                format!("{}: channels", path.display()),
                c,
                (found / per_channel) as usize,
            ));
        }
        return Err(Error::TruncatedPayload {
            path,
            expected,
            found,
        });
    }
    let mut data = Matrix::zeros(c, n * t);
    let mut words = bytes.chunks_exact(8).map(|w| f64::from_le_bytes(w.try_into().expect("8-byte chunk")));
    for i in 0..n {
        for r in 0..c {
            for s in 0..t {
                data[(r, i * t + s)] = words.next().expect("length checked");
            }
        }
    }
    TrialSet::from_concatenated(data, t, labels).map_err(|e| e.context(path.display().to_string()))
}

/// Reads a dataset written by [`save_dataset`] (or any producer of the same
/// format).
pub fn load_dataset(dir: &Path) -> Result<Vec<SubjectRecord>> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read(&manifest_path).map_err(|e| Error::from(e).context(manifest_path.display().to_string()))?;
    let value: serde_json::Value = serde_json::from_slice(&text)
        .map_err(|e| Error::from(e).context(manifest_path.display().to_string()))?;
    match value.get("format_version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        other => {
            return Err(Error::BadMagic {
                path: manifest_path,
                detail: match other {
                    Some(v) => format!("unsupported format_version {v}"),
                    None => "missing format_version".into(),
                },
            })
        }
    }
    let manifest: Manifest =
        serde_json::from_value(value).map_err(|e| Error::from(e).context(manifest_path.display().to_string()))?;
    manifest
        .subjects
        .iter()
        .map(|s| {
            let train = decode(dir, &s.train)?;
            let test = decode(dir, &s.test)?;
            SubjectRecord::new(s.id.clone(), train, test)
        })
        .collect()
}
