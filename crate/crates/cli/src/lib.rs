//! Command-line front end: closed-form tables, simulations and sweeps with
//! reproducible result files.

pub mod analytic;
pub mod config;
pub mod error;
pub mod run;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{Mode, RunConfig};
pub use error::{CliError, CliResult};
pub use run::{execute, replay, write_outputs, Command, ResultRow, RunManifest, CSV_HEADER};

#[derive(Debug, Parser)]
#[command(name = "polymer", version, about = "Directed polymers in a Poissonian medium")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Evaluate closed forms and print CSV
    Analytic {
        #[command(subcommand)]
        query: analytic::Analytic,
    },
    /// Run one configuration
    Simulate(RunArgs),
    /// Run a grid over beta, nu and t
    Sweep(RunArgs),
    /// Rerun the experiment recorded in a manifest.json
    Replay {
        manifest: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    /// `key = value` configuration file
    pub config: PathBuf,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// overrides the config's seed
    #[arg(long)]
    pub seed: Option<u64>,
}

fn load_config(args: &RunArgs) -> CliResult<RunConfig> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

pub fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Cmd::Analytic { query } => {
            print!("{}", analytic::analytic_csv(&query)?);
        }
        Cmd::Simulate(args) => {
            let out = execute(Command::Simulate, &load_config(&args)?)?;
            write_outputs(&args.out, &out)?;
        }
        Cmd::Sweep(args) => {
            let out = execute(Command::Sweep, &load_config(&args)?)?;
            write_outputs(&args.out, &out)?;
        }
        Cmd::Replay { manifest, out } => {
            let text = fs::read_to_string(&manifest)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", manifest.display())))?;
            let m: RunManifest =
                serde_json::from_str(&text).map_err(|e| CliError::Config(format!("manifest: {e}")))?;
            write_outputs(&out, &replay(&m)?)?;
        }
    }
    Ok(())
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("polymer: {e}");
            e.exit_code()
        }
    }
}
