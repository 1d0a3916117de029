//! Command-line front end of `relaxlab`: configuration files, validation,
//! and the `simulate`, `reference`, `sweep`, `entropy-audit` and
//! `linear-check` commands.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod init;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::Outcome;
pub use config::{parse_config, parse_config_str, CommandKind, RunConfig, OUT_ENV};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "relaxlab", version, about = "Diffusive relaxation lab: kinetic solver, limit solver and ε-sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the kinetic relaxation solver at `model.eps`.
    Simulate(CommonArgs),
    /// Run the limit (viscous) solver.
    Reference(CommonArgs),
    /// Run the ε-ladder and fit convergence rates.
    Sweep(CommonArgs),
    /// Build and check the tabulated kinetic entropy.
    EntropyAudit(CommonArgs),
    /// Check the linear-flux symmetrizer and the closed-form solution.
    LinearCheck(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML configuration file; missing keys take their defaults.
    #[arg(short, long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Override one key, e.g. `--set model.eps=0.05` (repeatable).
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    pub sets: Vec<String>,
    /// Output directory (beats `RELAXLAB_OUT` and `[output] dir`).
    #[arg(short, long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

impl Command {
    fn parts(&self) -> (CommandKind, &CommonArgs) {
        match self {
            Command::Simulate(a) => (CommandKind::Simulate, a),
            Command::Reference(a) => (CommandKind::Reference, a),
            Command::Sweep(a) => (CommandKind::Sweep, a),
            Command::EntropyAudit(a) => (CommandKind::EntropyAudit, a),
            Command::LinearCheck(a) => (CommandKind::LinearCheck, a),
        }
    }
}

/// Resolves the configuration and runs the command.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let (kind, args) = cli.command.parts();
    let config = parse_config(args.config.as_deref(), &args.sets, args.out.as_deref(), std::env::var(OUT_ENV).ok())?;
    match kind {
        CommandKind::Simulate => commands::simulate(&config),
        CommandKind::Reference => commands::reference(&config),
        CommandKind::Sweep => commands::sweep(&config),
        CommandKind::EntropyAudit => commands::entropy_audit(&config),
        CommandKind::LinearCheck => commands::linear_check(&config),
    }
}
