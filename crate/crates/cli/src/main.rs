//! `nnsr`: experiments, solver runs and curve exports as CSV/JSON/PGM data.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

mod cmd;
mod failure;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cmd::inpaint::InpaintArgs;
use cmd::msi::MsiArgs;
use cmd::prox_curve::ProxCurveArgs;
use cmd::replay::ReplayArgs;
use cmd::synth::SynthArgs;

#[derive(Parser, Debug)]
#[command(name = "nnsr", version, about = "Robust low-rank matrix completion experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the HOW, soft-threshold and Welsch proximity operators.
    ProxCurve(ProxCurveArgs),
    /// Synthetic low-rank recovery, optionally swept along one axis.
    Synth(SynthArgs),
    /// Inpaint a corrupted grayscale image.
    Inpaint(InpaintArgs),
    /// Restore a multispectral cube from a directory of bands.
    Msi(MsiArgs),
    /// Re-run a command from its manifest.
    Replay(ReplayArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::ProxCurve(a) => cmd::prox_curve::run(a),
        Command::Synth(a) => cmd::synth::run(a),
        Command::Inpaint(a) => cmd::inpaint::run(a),
        Command::Msi(a) => cmd::msi::run(a),
        Command::Replay(a) => cmd::replay::run(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("nnsr: {failure}");
            failure.exit_code()
        }
    }
}
