//! Run manifest: configuration echo, conventions, derived quantities and a
//! checksummed inventory of every file a run wrote.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::output::{write_text, OutputError, OutputResult};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub units: serde_json::Value,
    pub code_version: String,
    pub derived: serde_json::Value,
    pub checks: Vec<CheckOutcome>,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

pub fn units() -> serde_json::Value {
    serde_json::json!({
        "hbar": 1.0,
        "kinetic_operator": "-d^2/dx^2",
        "mass": 0.5,
        "ground_surface": "U1 = x^2/2 for harmonic models",
        "laser_frame": "rotating wave; channel 2 carries U2 - omega",
        "chirp": "channel-2 offset chirp_rate * (t - t_center)",
        "populations": "sum |psi|^2 dx",
    })
}

pub fn sha256_file(path: &Path) -> OutputResult<(u64, String)> {
    let bytes = fs::read(path).map_err(|source| OutputError {
        path: path.to_path_buf(),
        source,
    })?;
    Ok((bytes.len() as u64, hex::encode(Sha256::digest(&bytes))))
}

/// Tracks the files a run writes below its output directory.
#[derive(Debug)]
pub struct Inventory {
    root: PathBuf,
    files: Vec<String>,
}

impl Inventory {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            files: Vec::new(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Writes `text` to `relative` and records it.
    pub fn write(&mut self, relative: &str, text: &str) -> OutputResult<PathBuf> {
        let path = self.root.join(relative);
        write_text(&path, text)?;
        if !self.files.iter().any(|f| f == relative) {
            self.files.push(relative.to_string());
        }
        Ok(path)
    }

    pub fn entries(&self) -> OutputResult<Vec<FileEntry>> {
        let mut files = self.files.clone();
        files.sort();
        files
            .into_iter()
            .map(|path| {
                let (bytes, sha256) = sha256_file(&self.root.join(&path))?;
                Ok(FileEntry { path, bytes, sha256 })
            })
            .collect()
    }
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> OutputResult<PathBuf> {
    let path = dir.join(MANIFEST_NAME);
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    write_text(&path, &(text + "\n"))?;
    Ok(path)
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error(transparent)]
    Io(#[from] OutputError),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest, ManifestError> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|source| OutputError {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| ManifestError::Parse {
        path,
        message: e.to_string(),
    })
}

/// One inventory discrepancy found by [`verify_dir`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mismatch {
    Missing(String),
    Changed(String),
}

/// Re-hashes every listed file. An empty result means the inventory holds.
pub fn verify_dir(dir: &Path) -> Result<Vec<Mismatch>, ManifestError> {
    let manifest = read_manifest(dir)?;
    let mut problems = Vec::new();
    for entry in &manifest.files {
        let path = dir.join(&entry.path);
        if !path.exists() {
            problems.push(Mismatch::Missing(entry.path.clone()));
            continue;
        }
        let (bytes, sha) = sha256_file(&path)?;
        if bytes != entry.bytes || sha != entry.sha256 {
            problems.push(Mismatch::Changed(entry.path.clone()));
        }
    }
    Ok(problems)
}
