use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Provenance written next to every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub command_line: Vec<String>,
    pub seed: Option<u64>,
    pub deterministic: bool,
    pub threads: Option<usize>,
    /// Effective settings after defaults, config file and flags.
    pub config: serde_json::Value,
    pub config_file: Option<String>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub checkpoint: Option<PathBuf>,
    /// Wall-clock measurements; the only run-dependent values besides timestamps.
    pub timing: serde_json::Value,
    pub git_describe: String,
    pub started_unix: u64,
    pub finished_unix: u64,
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let mut f =
        std::fs::File::open(path).map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

impl RunManifest {
    pub fn start(seed: Option<u64>, deterministic: bool, threads: Option<usize>) -> Self {
        Self {
            tool_version: env!("CARGO_PKG_VERSION"),
            command_line: std::env::args().collect(),
            seed,
            deterministic,
            threads,
            config: serde_json::Value::Null,
            config_file: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            checkpoint: None,
            timing: serde_json::Value::Null,
            git_describe: git_describe(),
            started_unix: now(),
            finished_unix: 0,
        }
    }

    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        self.inputs.push(FileDigest {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> CliResult<()> {
        self.outputs.push(FileDigest {
            path: path.to_path_buf(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn finish(mut self, path: &Path) -> CliResult<()> {
        self.finished_unix = now();
        let text = serde_json::to_string_pretty(&self).map_err(|e| CliError::Compute(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
    }
}
