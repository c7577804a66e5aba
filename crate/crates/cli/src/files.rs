use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub fn open_input(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::from_io(path, e))
}

pub fn require_input(path: &Path) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::MissingInput(path.display().to_string()))
    }
}

/// Writes `bytes` to a temporary file beside `path`, then renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::from_io(dir, e))?;
    let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// `out/v.jsonl` with suffix `manifest.json` becomes `out/v.manifest.json`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = fs::read(path).map_err(|e| CliError::from_io(path, e))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub sha256: String,
}

impl Artifact {
    pub fn of(path: &Path) -> CliResult<Self> {
        Ok(Artifact { path: path.to_path_buf(), sha256: sha256_file(path)? })
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Started,
    Complete,
    Failed,
}

/// Provenance record written next to every command's results.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<Artifact>,
    pub outputs: Vec<Artifact>,
    pub status: RunStatus,
}

impl RunManifest {
    pub fn start(command: &str, seed: u64, config: serde_json::Value, inputs: &[&Path]) -> CliResult<Self> {
        Ok(RunManifest {
            tool: "phenokit",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            config,
            inputs: inputs.iter().map(|p| Artifact::of(p)).collect::<CliResult<_>>()?,
            outputs: Vec::new(),
            status: RunStatus::Started,
        })
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut json = serde_json::to_vec_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        json.push(b'\n');
        write_atomic(path, &json)
    }

    /// Records the outputs and final status, then rewrites the manifest.
    pub fn finish(&mut self, path: &Path, outputs: &[&Path], status: RunStatus) -> CliResult<()> {
        self.outputs = outputs.iter().map(|p| Artifact::of(p)).collect::<CliResult<_>>()?;
        self.status = status;
        self.write(path)
    }
}

/// Serializes items one JSON object per line.
pub fn to_jsonl<T: Serialize>(items: &[T]) -> CliResult<Vec<u8>> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item).map_err(|e| CliError::Io(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}
