use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod output;

use config::RunConfig;
use error::{CliError, Kind};

/// Arithmetic indices, Lyapunov exponents and Gordon-type eigenvalue
/// exclusion for quasiperiodic Schrödinger operators with meromorphic
/// potentials.
#[derive(Debug, Parser)]
#[command(name = "qpsc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-level tables of beta, delta and gamma.
    Indices(Common),
    /// Lyapunov exponents over the energy grid.
    Lyapunov(Common),
    /// Exclusion certificates and resonance estimates at chosen levels.
    Gordon(Common),
    /// Label energies against the delta band.
    Classify(Common),
    /// Continued-fraction expansion of alpha.
    Cf(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    #[arg(long)]
    verbose: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, cmd): (&Common, fn(&RunConfig) -> Result<output::Outputs, CliError>) = match &cli.command {
        Command::Indices(c) => (c, commands::indices),
        Command::Lyapunov(c) => (c, commands::lyapunov_cmd),
        Command::Gordon(c) => (c, commands::gordon),
        Command::Classify(c) => (c, commands::classify),
        Command::Cf(c) => (c, commands::cf),
    };
    env_logger::Builder::new()
        .filter_level(if common.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .format_timestamp(None)
        .init();
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::config(format!("--threads: {e}")))?;
    }
    let text = std::fs::read_to_string(&common.config).map_err(|e| CliError::io(&common.config, e))?;
    let cfg = RunConfig::parse(&text)?;
    let out = cmd(&cfg)?;
    let dir = common
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    log::info!("writing {} to {}", out.names().collect::<Vec<_>>().join(", "), dir.display());
    for path in out.write(&dir, cfg.output.overwrite)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string();
            eprintln!("{}", CliError::new(Kind::Config, first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.kind.exit_code() as u8)
        }
    }
}
