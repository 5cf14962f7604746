//! `pathsum`: runs one lattice path-sum experiment per invocation and writes
//! its tables to an output directory.
//!
//! Exit status is 0 on success, 1 for configuration or usage errors and 2
//! when the engine refuses the work (enumeration cap, transfer budget,
//! overflowing weights).

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{ExperimentConfig, Format};
use crate::error::{CliError, EXIT_CONFIG, EXIT_OK};

#[derive(Debug, Parser)]
#[command(name = "pathsum", version, about = "Lattice path-sum experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Sampling seed; overrides `seed`.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Output directory; overrides `output_path`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Table format; overrides `format`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Override one config key. Repeatable; later values win.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Transfer-matrix kernel, |K|² and p̂ for all endpoint pairs.
    Kernel,
    /// Least-m path, its m rate, and the scan over h_values.
    Classical,
    /// Lattice kernel against the continuum propagator.
    CompareAnalytic,
    /// Seeded position draws from the end-slice pdf.
    Sample,
    /// List every admissible path between the endpoints.
    Enumerate,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(cli.config.as_deref(), &cli.set)?;
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    if let Some(out) = &cli.out {
        cfg.output_path = out.clone();
    }
    if let Some(format) = cli.format {
        cfg.format = format;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load(cli)?;
    let written = match cli.command {
        Command::Kernel => commands::kernel(&cfg)?,
        Command::Classical => commands::classical(&cfg)?,
        Command::CompareAnalytic => {
            let (written, report) = commands::compare(&cfg)?;
            println!("max_rel_error {}", output::real(report.max_rel_error));
            written
        }
        Command::Sample => commands::sample(&cfg)?,
        Command::Enumerate => commands::enumerate(&cfg)?,
    };
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
