// Copyright 2026 The transmon-drag Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use transmon_cli::{run, Command, Overrides, OUT_ENV};

#[derive(Parser)]
#[command(name = "transmon", version, about = "Transmon DRAG gate simulation and optimization")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for this run.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Integration step in picoseconds.
    #[arg(long = "dt-ps", global = true)]
    dt_ps: Option<f64>,

    /// Default output root.
    #[arg(long, global = true, env = OUT_ENV, hide = true)]
    out_root: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Level energies, wavefunctions and matrix elements.
    Model,
    /// Propagate a single pulse.
    Simulate,
    /// Infidelity curves over pulse width, A_y and W.
    Sweep,
    /// Drive spectrum, with the no-DRAG reference.
    Spectrum,
    /// Figure-of-merit tables.
    Fom {
        /// Reuse curves from a previous sweep.json instead of sweeping.
        #[arg(long)]
        from: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (cmd, from) = match cli.command {
        Cmd::Model => (Command::Model, None),
        Cmd::Simulate => (Command::Simulate, None),
        Cmd::Sweep => (Command::Sweep, None),
        Cmd::Spectrum => (Command::Spectrum, None),
        Cmd::Fom { from } => (Command::Fom, from),
    };
    let ov = Overrides { out: cli.out, jobs: cli.jobs, dt_ps: cli.dt_ps, env_root: cli.out_root };
    match run(cmd, cli.config.as_deref(), from.as_deref(), &ov) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
