//! Run manifest: every artifact a command writes, with a content hash so a
//! rerun can be checked for byte identity.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use rearrange::Result;

#[derive(Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct Manifest {
    pub version: String,
    pub seed: Option<u64>,
    pub wall_clock_secs: f64,
    pub files: Vec<FileEntry>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

/// Collects written files and renders the manifest at the end of a command.
pub struct ManifestBuilder {
    out_dir: PathBuf,
    seed: Option<u64>,
    started: Instant,
    files: Vec<PathBuf>,
}

impl ManifestBuilder {
    pub fn new(out_dir: &Path, seed: Option<u64>) -> Self {
        ManifestBuilder {
            out_dir: out_dir.to_path_buf(),
            seed,
            started: Instant::now(),
            files: Vec::new(),
        }
    }

    /// Register a file that was just written under the output directory.
    pub fn record(&mut self, path: PathBuf) {
        self.files.push(path);
    }

    pub fn write(self) -> Result<PathBuf> {
        let files = self
            .files
            .iter()
            .map(|p| {
                Ok(FileEntry {
                    path: p
                        .strip_prefix(&self.out_dir)
                        .unwrap_or(p)
                        .to_string_lossy()
                        .into_owned(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let manifest = Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            wall_clock_secs: self.started.elapsed().as_secs_f64(),
            files,
        };
        let path = self.out_dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&manifest)
            .map_err(|e| rearrange::Error::Parse(e.to_string()))?;
        std::fs::write(&path, json)?;
        Ok(path)
    }
}
