use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "hardylab", about = "Experiment runner for the hardylab library", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        /// Path to the experiment config.
        config: PathBuf,
        /// Output directory for CSV tables and the JSON summary.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads for sweeps (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Turn failed weighted-norm tail checks into hard errors.
        #[arg(long)]
        strict_tails: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, threads, strict_tails } => {
            ExitCode::from(hardylab::cli::run(&config, &out, threads, strict_tails) as u8)
        }
    }
}
