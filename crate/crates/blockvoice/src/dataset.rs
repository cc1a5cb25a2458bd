//! Trial datasets: one JSON trial per line, blank lines ignored.

use std::collections::BTreeSet;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use blockvoice_core::eval::Trial;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{}: no such file", .0.display())]
    Missing(PathBuf),
    #[error("{path}: {source}", path = .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: duplicate trial id '{id}'")]
    DuplicateId { line: usize, id: String },
    #[error("dataset is empty")]
    Empty,
}

pub fn parse_dataset(text: &str) -> Result<Vec<Trial>, DatasetError> {
    let mut trials = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let trial: Trial =
            serde_json::from_str(line).map_err(|e| DatasetError::Parse { line: i + 1, message: e.to_string() })?;
        if !ids.insert(trial.id.clone()) {
            return Err(DatasetError::DuplicateId { line: i + 1, id: trial.id });
        }
        trials.push(trial);
    }
    if trials.is_empty() {
        return Err(DatasetError::Empty);
    }
    Ok(trials)
}

pub fn read_dataset(path: &Path) -> Result<Vec<Trial>, DatasetError> {
    let bytes = fs::read(path).map_err(|source| match source.kind() {
        io::ErrorKind::NotFound => DatasetError::Missing(path.to_path_buf()),
        _ => DatasetError::Io { path: path.to_path_buf(), source },
    })?;
    let text = String::from_utf8(bytes).map_err(|e| DatasetError::Parse { line: 0, message: e.to_string() })?;
    parse_dataset(&text)
}

pub fn to_jsonl(trials: &[Trial]) -> String {
    let mut out = String::new();
    for t in trials {
        out.push_str(&serde_json::to_string(t).expect("trials serialize"));
        out.push('\n');
    }
    out
}

/// The bundled sample: 24 commands per language under two microphones and
/// two ASR services, with scripted corruptions.
pub const SAMPLE: &str = include_str!("../data/sample.jsonl");

pub fn sample() -> Vec<Trial> {
    parse_dataset(SAMPLE).expect("bundled sample parses")
}
