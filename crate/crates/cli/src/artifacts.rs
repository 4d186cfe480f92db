//! In-memory artifact buffer and the run manifest. Nothing touches the
//! output directory until every stage has succeeded.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Default)]
pub struct Artifacts {
    files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.insert(name.into(), bytes.into());
    }

    pub fn add_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::Data(e.to_string()))?;
        bytes.push(b'\n');
        self.add(name, bytes);
        Ok(())
    }

    /// Serializes `rows` with a header derived from the row type.
    pub fn add_csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| CliError::Data(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
        self.add(name, bytes);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(Vec::as_slice)
    }
}

#[derive(Debug, Serialize)]
struct FileEntry {
    path: String,
    bytes: u64,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    config_hash: String,
    config: &'a RunConfig,
    inputs: Vec<FileEntry>,
    artifacts: Vec<FileEntry>,
    /// The only field that differs between identical runs.
    generated_at: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn input_entry(path: &Path) -> Result<FileEntry, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(FileEntry {
        path: path.display().to_string(),
        bytes: bytes.len() as u64,
        sha256: sha256_hex(&bytes),
    })
}

/// Writes every artifact and then `manifest.json` into `cfg.out`.
pub fn commit(artifacts: &Artifacts, cfg: &RunConfig, command: &str) -> Result<Vec<PathBuf>, CliError> {
    let config_json = serde_json::to_vec(cfg).map_err(|e| CliError::Data(e.to_string()))?;
    let inputs = [&cfg.transactions, &cfg.prices]
        .into_iter()
        .flatten()
        .map(|p| input_entry(p))
        .collect::<Result<Vec<_>, _>>()?;
    let manifest = Manifest {
        tool: "etsmarket",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed: cfg.seed,
        config_hash: sha256_hex(&config_json),
        config: cfg,
        inputs,
        artifacts: artifacts
            .files
            .iter()
            .map(|(name, bytes)| FileEntry {
                path: name.clone(),
                bytes: bytes.len() as u64,
                sha256: sha256_hex(bytes),
            })
            .collect(),
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    };
    let mut manifest_bytes = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Data(e.to_string()))?;
    manifest_bytes.push(b'\n');

    let io = |path: &Path, e: std::io::Error| CliError::Data(format!("cannot write {}: {e}", path.display()));
    fs::create_dir_all(&cfg.out).map_err(|e| io(&cfg.out, e))?;
    let mut written = Vec::new();
    for (name, bytes) in artifacts.files.iter().chain([(&MANIFEST.to_owned(), &manifest_bytes)]) {
        let path = cfg.out.join(name);
        fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
