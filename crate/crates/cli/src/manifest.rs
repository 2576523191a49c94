//! Run manifests: content-addressed run ids, output registry, and the
//! serialized configuration echo.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub run_id: String,
    pub code_version: String,
    pub created_unix_s: u64,
    pub command: String,
    pub threads: usize,
    pub config: RunConfig,
    pub outputs: Vec<String>,
    pub headline: serde_json::Value,
}

/// Content hash of the configuration, the command, and the code version.
/// Worker count is execution detail and stays out of the hash.
pub fn run_id(command: &str, config: &RunConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(command.as_bytes());
    hasher.update(b"\n");
    hasher.update(CODE_VERSION.as_bytes());
    hasher.update(b"\n");
    hasher.update(serde_json::to_string(config).expect("config serializes").as_bytes());
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Output directory: the explicit --out path, or runs/<run_id>.
pub fn output_dir(out_flag: Option<&Path>, id: &str) -> PathBuf {
    match out_flag {
        Some(p) => p.to_path_buf(),
        None => PathBuf::from("runs").join(id),
    }
}

/// A run directory being populated; the manifest lands last, so no output
/// file exists without one once the run returns.
pub struct RunWriter {
    dir: PathBuf,
    outputs: Vec<String>,
}

impl RunWriter {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    pub fn write_output(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn finish(
        self,
        command: &str,
        id: &str,
        threads: usize,
        config: &RunConfig,
        headline: serde_json::Value,
    ) -> Result<PathBuf, CliError> {
        let manifest = RunManifest {
            run_id: id.to_string(),
            code_version: CODE_VERSION.to_string(),
            created_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            command: command.to_string(),
            threads,
            config: config.clone(),
            outputs: self.outputs,
            headline,
        };
        let path = self.dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Config(format!("manifest serialization: {e}")))?;
        std::fs::write(&path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

/// 17-significant-digit float formatting, locale independent.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}
