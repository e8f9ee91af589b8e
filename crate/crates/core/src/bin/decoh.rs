use std::path::PathBuf;
use std::process::ExitCode;

use adiabatic_decoherence::cli::{self, Command};
use clap::{Parser, Subcommand};

/// Decoherence sweeps: factors, density matrices, spectra, widths and self-checks.
#[derive(Parser)]
#[command(name = "decoh", version)]
struct Args {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// JSON run configuration.
    config: Option<PathBuf>,
    /// Override a config field, e.g. `--set grid.n=256` (repeatable).
    #[arg(long = "set", value_name = "KEY.PATH=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: `output.dir` from the config, else `.`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decoherence factor F_N(x′, x, t) over positions and times.
    Factor(Common),
    /// Reduced density matrix on a grid, with optional SVG maps.
    Rho(Common),
    /// R(t) for a spectral density, with the band lower bound.
    Spectrum(Common),
    /// Free and damped packet widths.
    Dissipation(Common),
    /// Seeded oracle-agreement suite.
    Verify(Common),
}

fn main() -> ExitCode {
    let args = Args::parse();
    let (command, common) = match args.command {
        Cmd::Factor(c) => (Command::Factor, c),
        Cmd::Rho(c) => (Command::Rho, c),
        Cmd::Spectrum(c) => (Command::Spectrum, c),
        Cmd::Dissipation(c) => (Command::Dissipation, c),
        Cmd::Verify(c) => (Command::Verify, c),
    };
    let result = cli::load_config(common.config.as_deref(), &common.overrides)
        .and_then(|cfg| cli::run(command, &cfg, common.out.as_deref(), common.seed));
    match result {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if !matches!(e, cli::CliError::VerifyFailed) {
                eprintln!("decoh {}: {e}", command.name());
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
