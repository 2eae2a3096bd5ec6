mod config;
mod losscheck;
mod roundtrip;
mod toy;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Closed-symmetry-loop experiments.
#[derive(Parser)]
#[command(name = "csl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the disc study and write a results table.
    #[command(after_help = config::HELP)]
    Toy {
        /// Flat `key = value` file; a manifest from an earlier run also works.
        #[arg(long, short)]
        config: Option<PathBuf>,
        /// Run only this representation.
        #[arg(long, short)]
        representation: Option<String>,
        /// Output directory.
        #[arg(long, short, default_value = "toy-out")]
        out: PathBuf,
    },
    /// Render a symmetric object, reverse its star and dash maps and solve PnP.
    Roundtrip(roundtrip::Args),
    /// Check loss invariants on random maps.
    Losscheck {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Process exit status of a failed command.
#[derive(Debug)]
pub enum Failure {
    /// An invariant check failed.
    Check(String),
    /// Bad configuration or arguments.
    Config(String),
    /// The scene gives too little to work with.
    Degenerate(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Config(_) => 2,
            Failure::Degenerate(_) => 3,
            Failure::Other(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Config(m) | Failure::Degenerate(m) | Failure::Other(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Toy {
            config,
            representation,
            out,
        } => toy::run(config.as_deref(), representation.as_deref(), &out),
        Command::Roundtrip(args) => roundtrip::run(&args),
        Command::Losscheck { trials, seed } => losscheck::run(trials, seed),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
