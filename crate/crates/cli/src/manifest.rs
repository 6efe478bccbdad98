//! Run manifests: enough to replay a command and check its outputs.

use std::fs;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::io::write_json;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of(path: &Path) -> CliResult<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::read(path, e))?;
        Ok(FileDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallClock {
    pub started_unix_ms: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Command-line arguments without the output directory and thread
    /// count, which do not affect results.
    pub args: Vec<String>,
    pub master_seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    /// Output file names (relative to the manifest) with their digests.
    pub outputs: Vec<FileDigest>,
    pub wall_clock: WallClock,
}

impl RunManifest {
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::read(path, e))
    }

    /// Fails if any recorded input no longer matches its digest.
    pub fn verify_inputs(&self) -> CliResult<()> {
        for input in &self.inputs {
            let now = FileDigest::of(Path::new(&input.path))?;
            if now.sha256 != input.sha256 {
                return Err(CliError::Input(format!(
                    "input {} changed since the recorded run",
                    input.path
                )));
            }
        }
        Ok(())
    }
}

/// Collects what a command read and wrote, then writes the manifest.
pub struct Recorder {
    command: String,
    args: Vec<String>,
    master_seed: u64,
    started_unix_ms: u64,
    start: Instant,
    inputs: Vec<FileDigest>,
    outputs: Vec<String>,
    config: serde_json::Value,
}

impl Recorder {
    pub fn new(command: &str, args: Vec<String>, master_seed: u64) -> Self {
        let started_unix_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0);
        Recorder {
            command: command.to_string(),
            args,
            master_seed,
            started_unix_ms,
            start: Instant::now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            config: serde_json::Value::Null,
        }
    }

    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        self.inputs.push(FileDigest::of(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        self.outputs.push(name);
    }

    pub fn config(&mut self, config: serde_json::Value) {
        self.config = config;
    }

    pub fn finish(self, out_dir: &Path) -> CliResult<()> {
        let mut outputs = Vec::new();
        for name in &self.outputs {
            let digest = FileDigest::of(&out_dir.join(name))?;
            outputs.push(FileDigest {
                path: name.clone(),
                sha256: digest.sha256,
            });
        }
        let manifest = RunManifest {
            tool: "linkctr".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command,
            args: self.args,
            master_seed: self.master_seed,
            config: self.config,
            inputs: self.inputs,
            outputs,
            wall_clock: WallClock {
                started_unix_ms: self.started_unix_ms,
                elapsed_ms: self.start.elapsed().as_millis() as u64,
            },
        };
        write_json(&out_dir.join(MANIFEST_FILE), &manifest)
    }
}

/// Drops `--out` and `--threads` (with their values) from an argument list.
pub fn replayable_args(args: &[String]) -> Vec<String> {
    let mut kept = Vec::new();
    let mut skip_next = false;
    for a in args {
        if skip_next {
            skip_next = false;
            continue;
        }
        match a.as_str() {
            "--out" | "--threads" => skip_next = true,
            s if s.starts_with("--out=") || s.starts_with("--threads=") => {}
            _ => kept.push(a.clone()),
        }
    }
    kept
}
