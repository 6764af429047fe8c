// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

//! Result files. Writes go through a temporary file in the target directory
//! and are renamed into place. Every file carries the resolved config and
//! SHA-256 digests of the config and of the payload.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

const LOCK_NAME: &str = ".transmon.lock";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: String,
    pub config: serde_json::Value,
    pub config_sha256: String,
}

impl Provenance {
    pub fn new(config: &RunConfig) -> CliResult<Self> {
        let config = serde_json::to_value(config)
            .map_err(|e| CliError::Validation(format!("cannot serialize config: {e}")))?;
        let config_sha256 = sha256_hex(config.to_string().as_bytes());
        Ok(Self { tool: format!("transmon {}", env!("CARGO_PKG_VERSION")), config, config_sha256 })
    }
}

#[derive(Serialize)]
struct JsonDocument<'a, T: Serialize> {
    provenance: &'a Provenance,
    data_sha256: String,
    data: &'a T,
}

/// Output directory held for the lifetime of the value.
#[derive(Debug)]
pub struct OutputDir {
    path: PathBuf,
    provenance: Provenance,
    written: Vec<PathBuf>,
}

impl OutputDir {
    /// Creates `path` if needed and takes its lock file. Fails if another
    /// run holds the directory.
    pub fn claim(path: &Path, provenance: Provenance) -> CliResult<Self> {
        fs::create_dir_all(path).map_err(|e| CliError::io(path, e))?;
        let lock = path.join(LOCK_NAME);
        match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                let msg = format!("output directory in use; remove {} if no run is active", lock.display());
                return Err(CliError::io(path, std::io::Error::new(e.kind(), msg)));
            }
            Err(e) => return Err(CliError::io(&lock, e)),
        }
        Ok(Self { path: path.to_path_buf(), provenance, written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn persist(&mut self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let target = self.path.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.path).map_err(|e| CliError::io(&self.path, e))?;
        tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
        tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
        tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
        log::info!("wrote {}", target.display());
        self.written.push(target.clone());
        Ok(target)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, data: &T) -> CliResult<PathBuf> {
        let encode = |e: serde_json::Error| CliError::Validation(format!("cannot serialize {name}: {e}"));
        let compact = serde_json::to_string(data).map_err(encode)?;
        let doc = JsonDocument { provenance: &self.provenance, data_sha256: sha256_hex(compact.as_bytes()), data };
        let mut text = serde_json::to_string_pretty(&doc).map_err(encode)?;
        text.push('\n');
        self.persist(name, text.as_bytes())
    }

    /// CSV with `#` comment lines carrying the provenance ahead of the header row.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> CliResult<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::io(self.path.join(name), std::io::Error::other(e.to_string()));
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let body = w.into_inner().map_err(|e| CliError::io(self.path.join(name), e.into_error()))?;
        let mut out = String::new();
        out.push_str(&format!("# tool: {}\n", self.provenance.tool));
        out.push_str(&format!("# config_sha256: {}\n", self.provenance.config_sha256));
        out.push_str(&format!("# data_sha256: {}\n", sha256_hex(&body)));
        out.push_str(&format!("# config: {}\n", self.provenance.config));
        let mut bytes = out.into_bytes();
        bytes.extend_from_slice(&body);
        self.persist(name, &bytes)
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(self.path.join(LOCK_NAME));
    }
}

/// Shortest round-trip form; exponent notation for very small or large values.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
