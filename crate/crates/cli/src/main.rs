//! Command-line driver for the holonomy / deformation toolkit.
//!
//! Four subcommands share one JSON run configuration:
//!
//! * `holonomy` — build and certify the holonomy, write `holonomy.json`;
//! * `cocycle`  — evaluate the deformation cocycle, write `cocycle.csv`;
//! * `verify`   — run a verification suite, write `report.json` / `report.csv`;
//! * `scan`     — scan invariant signs over reduced words, write
//!   `verdict.json` / `spectrum.csv`.
//!
//! Exit codes: 0 on success, 1 when a run surfaces a mathematical finding
//! (an opposite-sign witness, a failed check, a construction obstruction),
//! 2 on usage or parse errors.

mod cocycle;
mod config;
mod holonomy;
mod report;
mod scan;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// How a command run can fail, split by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad invocation or config: exit code 2.
    Usage(String),
    /// The mathematics reported something: exit code 1.
    Finding(String),
}

impl Failure {
    /// Classify a library error: malformed inputs are usage errors, every
    /// other obstruction is a finding worth exit code 1.
    fn from_core(e: margulis_core::Error) -> Failure {
        match e {
            margulis_core::Error::InvalidSpec(_) | margulis_core::Error::IndexOutOfRange { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Finding(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "margulis-lab", version, about = "Holonomies, deformation cocycles, and sign scans for holed spheres")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving the report files (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    /// Vector-product and frame identities under random sweeps.
    Lorentz,
    /// Injectivity of the parameter-to-coordinates matrix.
    Iso,
    /// Margulis invariants against length derivatives.
    Gm,
    /// Twist variation of crossing-curve lengths.
    Twist,
    /// Everything above.
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Build the holonomy, certify it, and write holonomy.json.
    Holonomy(CommonArgs),
    /// Evaluate the deformation cocycle and write cocycle.csv.
    Cocycle {
        #[command(flatten)]
        common: CommonArgs,
        /// Re-derive the gauge-fixed frame coefficients of u(g1), u(g2)
        /// from the emitted values and check they vanish.
        #[arg(long)]
        gauge_check: bool,
    },
    /// Run a verification suite and write report.json / report.csv.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Which suite to run.
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
    },
    /// Scan Margulis-invariant signs over all canonical reduced words and
    /// write verdict.json / spectrum.csv.
    Scan {
        #[command(flatten)]
        common: CommonArgs,
        /// Longest word length to enumerate (at least 1).
        #[arg(long)]
        max_len: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Holonomy(common) => with_config(&common, holonomy::run),
        Command::Cocycle { common, gauge_check } => {
            with_config(&common, |loaded, out| cocycle::run(loaded, out, gauge_check))
        }
        Command::Verify { common, which } => {
            with_config(&common, |loaded, out| verify::run(loaded, out, which))
        }
        Command::Scan { common, max_len } => {
            with_config(&common, |loaded, out| scan::run(loaded, out, max_len))
        }
    };
    match outcome {
        Ok(()) => ExitCode::from(0),
        Err(Failure::Finding(msg)) => {
            eprintln!("finding: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn with_config(
    common: &CommonArgs,
    run: impl FnOnce(&config::LoadedConfig, &std::path::Path) -> Result<(), Failure>,
) -> Result<(), Failure> {
    let loaded = config::load(&common.config)?;
    run(&loaded, &common.out)
}
