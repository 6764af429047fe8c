// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: TOML configs in, CSV and JSON tables out.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use config::RunConfig;
use error::CliResult;
use output::{OutputDir, Provenance};

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "TRANSMON_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Model,
    Simulate,
    Sweep,
    Spectrum,
    Fom,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Model => "model",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Spectrum => "spectrum",
            Command::Fom => "fom",
        }
    }
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub dt_ps: Option<f64>,
    /// Output root from the environment.
    pub env_root: Option<PathBuf>,
}

pub fn resolve(config: Option<&Path>, ov: &Overrides) -> CliResult<RunConfig> {
    let mut cfg = match config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if ov.dt_ps.is_some() {
        cfg.run.dt_ps = ov.dt_ps;
    }
    if ov.jobs.is_some() {
        cfg.run.jobs = ov.jobs;
    }
    if ov.out.is_some() {
        cfg.run.out_dir = ov.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `--out`, then `run.out_dir`, then `<root>/<command>` with the root taken
/// from the environment or `transmon-out`.
pub fn output_dir(cfg: &RunConfig, cmd: Command, env_root: Option<&Path>) -> PathBuf {
    match &cfg.run.out_dir {
        Some(p) => p.clone(),
        None => env_root.unwrap_or(Path::new("transmon-out")).join(cmd.name()),
    }
}

/// Runs one subcommand and returns the files written.
pub fn run(cmd: Command, config: Option<&Path>, from: Option<&Path>, ov: &Overrides) -> CliResult<Vec<PathBuf>> {
    let cfg = resolve(config, ov)?;
    let dir = output_dir(&cfg, cmd, ov.env_root.as_deref());
    let mut out = OutputDir::claim(&dir, Provenance::new(&cfg)?)?;
    log::info!("{} -> {}", cmd.name(), dir.display());
    match cmd {
        Command::Model => commands::cmd_model(&cfg, &mut out)?,
        Command::Simulate => commands::cmd_simulate(&cfg, &mut out)?,
        Command::Sweep => commands::cmd_sweep(&cfg, &mut out)?,
        Command::Spectrum => commands::cmd_spectrum(&cfg, &mut out)?,
        Command::Fom => commands::cmd_fom(&cfg, from, &mut out)?,
    }
    Ok(out.written().to_vec())
}
