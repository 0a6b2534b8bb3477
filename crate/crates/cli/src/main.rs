//! `gpvm`: joint observables, the functional calculus and joint
//! measurements from JSON inputs.

mod commands;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gpvm::tolerance::{self, Tolerances};
use gpvm::Error;

#[derive(Parser, Debug)]
#[command(name = "gpvm", version, about = "Generalized joint observables for non-commuting pairs")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate J_AB on a region, or on every region of a partition.
    Joint {
        a: PathBuf,
        b: PathBuf,
        /// Region file.
        #[arg(long, conflicts_with = "partition", required_unless_present = "partition")]
        region: Option<PathBuf>,
        /// `singletons`, `rows`, `cols`, `full` or a partition file.
        #[arg(long)]
        partition: Option<String>,
    },
    /// Extract f_E(A,B) along a generating chain.
    Funcalc {
        a: PathBuf,
        b: PathBuf,
        /// Expression in `x` and `y`, e.g. "x + y".
        #[arg(long = "f")]
        f: String,
        /// `ascending` or a chain file.
        #[arg(long, default_value = "ascending")]
        chain: String,
    },
    /// Outcome probabilities and a sampled histogram of the unselected
    /// joint measurement.
    Measure {
        a: PathBuf,
        b: PathBuf,
        /// `singletons`, `rows`, `cols`, `full` or a partition file.
        partition: String,
        rho: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the randomized property suites.
    Verify {
        #[arg(long, default_value = "all", value_parser = ["lattice", "gpvm", "funcalc", "measure", "all"])]
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Shrinks the check tolerance far below round-off.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

/// Process outcome: text for stdout on success, or an exit code and a
/// message for stderr.
pub enum Outcome {
    Ok(String),
    Failed { code: u8, stderr: String },
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidFile(_) | Error::Parse(_) | Error::UnboundVariable(_) => 2,
        Error::FunctionUndefined { .. } => 4,
        _ => 3,
    }
}

fn install_tolerances() -> Result<(), String> {
    let Ok(spec) = std::env::var("GPVM_TOL") else {
        return Ok(());
    };
    let t = Tolerances::default().with_overrides(&spec).map_err(|e| format!("GPVM_TOL: {e}"))?;
    tolerance::install(t).map_err(|_| "tolerances already installed".to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = install_tolerances() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let outcome = match cli.command {
        Command::Joint { a, b, region, partition } => commands::joint(&a, &b, region.as_deref(), partition.as_deref(), cli.format),
        Command::Funcalc { a, b, f, chain } => commands::funcalc(&a, &b, &f, &chain, cli.format),
        Command::Measure {
            a,
            b,
            partition,
            rho,
            shots,
            seed,
        } => commands::measure(&a, &b, &partition, &rho, shots, seed, cli.format),
        Command::Verify {
            suite,
            trials,
            seed,
            inject_fault,
        } => commands::verify(&suite, trials, seed, inject_fault, cli.format),
    };
    match outcome {
        Outcome::Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Outcome::Failed { code, stderr } => {
            eprint!("{stderr}");
            ExitCode::from(code)
        }
    }
}
