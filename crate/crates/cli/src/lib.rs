//! Command-line front end for wavetrace: `simulate`, `plot`, `compare` and
//! `sweep`, driven by TOML configs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod error;
pub mod figures;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{PlotKind, RunFile};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "wavetrace", version, about = "Wave-potential ray tracing of collimated beams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Reserved. Runs are deterministic and take no seed, so this is rejected.
    #[arg(long, global = true)]
    pub seedless: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a beam and write trajectories, densities and a report.
    Simulate,
    /// Draw a figure from a config's [figure] section or from an artifact.
    Plot {
        /// Artifact to draw (trajectories.csv or density.csv).
        #[arg(long, conflicts_with = "config")]
        input: Option<PathBuf>,
        #[arg(long, value_parser = parse_kind)]
        kind: Option<PlotKind>,
        /// Density station to draw.
        #[arg(long)]
        station: Option<f64>,
    },
    /// Check a run against the paraxial and spreading-law references.
    Compare,
    /// Run the config once per epsilon in [sweep].
    Sweep,
}

fn parse_kind(s: &str) -> Result<PlotKind, String> {
    match s {
        "profiles" => Ok(PlotKind::Profiles),
        "launchG" | "launch_g" => Ok(PlotKind::LaunchG),
        "trajectories" => Ok(PlotKind::Trajectories),
        "density" => Ok(PlotKind::Density),
        _ => Err(format!("unknown kind `{s}` (profiles, launchG, trajectories, density)")),
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    if cli.seedless {
        return Err(CliError::Config("--seedless is reserved: runs are deterministic and take no seed".into()));
    }
    if cli.jobs == Some(0) {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let load = || -> Result<RunFile, CliError> {
        let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
        RunFile::load(path)
    };
    match &cli.command {
        Command::Simulate => commands::simulate(&load()?, &cli.out),
        Command::Compare => commands::compare(&load()?, &cli.out),
        Command::Sweep => commands::sweep(&load()?, &cli.out, cli.jobs),
        Command::Plot { input: Some(input), kind, station } => {
            let kind = kind.ok_or_else(|| CliError::Config("plot --input needs --kind".into()))?;
            commands::plot_artifact(input, kind, *station, &cli.out)
        }
        Command::Plot { input: None, kind, .. } => {
            let file = load()?;
            if let (Some(k), Some(f)) = (kind, &file.figure) {
                if *k != f.kind {
                    return Err(CliError::Config(format!(
                        "--kind {} does not match [figure] kind {}",
                        k.name(),
                        f.kind.name()
                    )));
                }
            }
            commands::plot_config(&file, &cli.out)
        }
    }
}

/// Parse `args` and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { commands::EXIT_CONFIG } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("wavetrace: {e}");
            e.exit_code()
        }
    }
}
