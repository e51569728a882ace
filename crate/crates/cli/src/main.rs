//! `voi`: value of information for finite-state decision problems.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use voi_core::Error;

use commands::Emitter;
use config::{CommonArgs, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "voi", version, about = "Value of information for finite-state decision problems")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Value function over a belief grid, with kink locations.
    Value,
    /// Value of an information structure and the prior's regime.
    Voi,
    /// Value of information with the applicable bound certificates.
    Bounds,
    /// Halfspaces of the confidence set at the prior.
    Confidence,
    /// Regime of the prior: confident, undecided, flexible or other.
    Classify,
    /// Insurance threshold, VoI slopes and curve data.
    Insurance,
    /// Classification of the marginal value of information across families.
    Table2,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Self::Value => "value",
            Self::Voi => "voi",
            Self::Bounds => "bounds",
            Self::Confidence => "confidence",
            Self::Classify => "classify",
            Self::Insurance => "insurance",
            Self::Table2 => "table2",
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } => 2,
        Error::ConvergenceFailure(_) | Error::QuadratureResidual(_) => 4,
        Error::Io(_) => 1,
        _ => 3,
    }
}

fn run(cli: &Cli) -> voi_core::Result<()> {
    let config = RunConfig::load(&cli.common)?;
    let e = Emitter {
        command: cli.command.name(),
        config: &config,
    };
    match cli.command {
        Command::Value => commands::value(&e),
        Command::Voi => commands::voi_cmd(&e),
        Command::Bounds => commands::bounds(&e),
        Command::Confidence => commands::confidence(&e),
        Command::Classify => commands::classify(&e),
        Command::Insurance => commands::insurance(&e),
        Command::Table2 => commands::marginal_grid(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
