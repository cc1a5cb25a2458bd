//! Configuration directories.
//!
//! A directory holds `blocks.json`, one `commands.<lang>.json` per language
//! and an optional `settings.json`. Missing settings take their defaults.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use blockvoice_core::config::{Config, ConfigError, ValidationError};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const ENV_VAR: &str = "BLOCKVOICE_CONFIG";
const BLOCKS: &str = "blocks.json";
const SETTINGS: &str = "settings.json";

#[derive(Debug, Error)]
pub enum ConfigLoadError {
    #[error("{}: no such file", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: no commands.<lang>.json files", .0.display())]
    NoLanguages(PathBuf),
    #[error("{path}: {source}", path = .path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}:{line}:{column}: {message}", .path.display())]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("invalid configuration: {0}")]
    Validation(#[from] ValidationError),
}

fn read(path: &Path) -> Result<String, ConfigLoadError> {
    fs::read_to_string(path).map_err(|source| match source.kind() {
        io::ErrorKind::NotFound => ConfigLoadError::MissingFile(path.to_path_buf()),
        _ => ConfigLoadError::Io { path: path.to_path_buf(), source },
    })
}

pub fn load_config(dir: &Path) -> Result<Config, ConfigLoadError> {
    if !dir.is_dir() {
        return Err(ConfigLoadError::MissingFile(dir.to_path_buf()));
    }
    let mut command_files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|source| ConfigLoadError::Io { path: dir.to_path_buf(), source })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("commands.") && n.ends_with(".json"))
        })
        .collect();
    command_files.sort();
    if command_files.is_empty() {
        return Err(ConfigLoadError::NoLanguages(dir.to_path_buf()));
    }

    let mut texts = Vec::new();
    for path in &command_files {
        texts.push((path.clone(), read(path)?));
    }
    let blocks_path = dir.join(BLOCKS);
    let blocks = read(&blocks_path)?;
    let settings_path = dir.join(SETTINGS);
    let settings = if settings_path.exists() { Some(read(&settings_path)?) } else { None };

    let names: Vec<String> = texts.iter().map(|(p, _)| p.display().to_string()).collect();
    let commands: Vec<(&str, &str)> = names.iter().map(String::as_str).zip(texts.iter().map(|(_, t)| t.as_str())).collect();
    let blocks_name = blocks_path.display().to_string();
    let settings_name = settings_path.display().to_string();
    Config::from_documents(
        &commands,
        (&blocks_name, &blocks),
        settings.as_deref().map(|s| (settings_name.as_str(), s)),
    )
    .map_err(|e| match e {
        ConfigError::Parse { document, line, column, message } => {
            ConfigLoadError::Parse { path: PathBuf::from(document), line, column, message }
        }
        ConfigError::Validation(v) => ConfigLoadError::Validation(v),
    })
}

/// The directory given explicitly, else the one named by [`ENV_VAR`], else
/// the bundled configuration.
pub fn resolve(dir: Option<&Path>) -> Result<(Config, Option<PathBuf>), ConfigLoadError> {
    let dir = dir.map(Path::to_path_buf).or_else(|| std::env::var_os(ENV_VAR).filter(|v| !v.is_empty()).map(PathBuf::from));
    match dir {
        Some(d) => Ok((load_config(&d)?, Some(d))),
        None => Ok((Config::bundled(), None)),
    }
}

/// Writes `config` as an editable directory.
pub fn write_config(dir: &Path, config: &Config) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let docs = config.to_documents();
    for (language, text) in &docs.commands {
        fs::write(dir.join(format!("commands.{}.json", language.code())), text)?;
    }
    fs::write(dir.join(BLOCKS), &docs.blocks)?;
    fs::write(dir.join(SETTINGS), &docs.settings)
}

/// SHA-256 of the configuration's canonical JSON, as `sha256:<hex>`.
pub fn config_hash(config: &Config) -> String {
    let canonical = serde_json::to_vec(config).expect("config serializes");
    sha256(&canonical)
}

pub fn sha256(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}
