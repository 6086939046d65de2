//! Per-command run manifest and the output directory it describes.

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub command: String,
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_hash: String,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub started_unix: u64,
    pub wall_time_seconds: f64,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects inputs and outputs for one command and writes them with the
/// effective config on [`Run::finish`].
pub struct Run {
    command: String,
    config: ExperimentConfig,
    dir: PathBuf,
    inputs: Vec<FileEntry>,
    outputs: Vec<FileEntry>,
    started: Instant,
    started_unix: u64,
}

impl Run {
    pub fn start(command: &str, config: &ExperimentConfig) -> CliResult<Run> {
        let dir = config.out.clone();
        std::fs::create_dir_all(&dir)
            .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
        let mut run = Run {
            command: command.to_string(),
            config: config.clone(),
            dir,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        run.write(CONFIG_FILE, config.to_json().as_bytes())?;
        Ok(run)
    }

    /// Reads an input file and records its digest.
    pub fn read_input(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
        self.note_input(path, &bytes);
        Ok(bytes)
    }

    pub fn read_input_string(&mut self, path: &Path) -> CliResult<String> {
        String::from_utf8(self.read_input(path)?)
            .map_err(|_| CliError::data(format!("{} is not valid UTF-8", path.display())))
    }

    pub fn note_input(&mut self, path: &Path, bytes: &[u8]) {
        let path = path.display().to_string();
        if self.inputs.iter().any(|e| e.path == path) {
            return;
        }
        self.inputs.push(FileEntry {
            path,
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
    }

    /// Records every file below `dir` as an input, in sorted order.
    pub fn note_input_dir(&mut self, dir: &Path) -> CliResult<()> {
        let mut names: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| CliError::data(format!("cannot read {}: {e}", dir.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        names.sort();
        for p in names {
            self.read_input(&p)?;
        }
        Ok(())
    }

    /// Writes `name` inside the output directory and records it.
    pub fn write(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", parent.display())))?;
        }
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.retain(|e| e.path != name);
        self.outputs.push(FileEntry {
            path: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(path)
    }

    /// Records files already present under `sub` (relative to the output
    /// directory), e.g. ones written by library code.
    pub fn record_existing(&mut self, sub: &Path) -> CliResult<()> {
        let dir = self.dir.join(sub);
        let mut files: Vec<PathBuf> = match std::fs::read_dir(&dir) {
            Ok(rd) => rd.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_file()).collect(),
            Err(_) => return Ok(()),
        };
        files.sort();
        for p in files {
            let bytes = std::fs::read(&p)
                .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", p.display())))?;
            let name = p.strip_prefix(&self.dir).unwrap_or(&p).display().to_string();
            self.outputs.retain(|e| e.path != name);
            self.outputs.push(FileEntry {
                path: name,
                sha256: sha256_hex(&bytes),
                bytes: bytes.len() as u64,
            });
        }
        Ok(())
    }

    pub fn finish(self) -> CliResult<Manifest> {
        let manifest = Manifest {
            schema_version: MANIFEST_SCHEMA_VERSION,
            command: self.command,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.config.seed,
            config_hash: self.config.hash(),
            inputs: self.inputs,
            outputs: self.outputs,
            started_unix: self.started_unix,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        let path = self.dir.join(MANIFEST_FILE);
        std::fs::write(&path, text)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
        Ok(manifest)
    }
}
