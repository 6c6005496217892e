//! Batch front end: reads a JSON problem, runs one library operation and
//! writes JSON (algebraic objects) or CSV (sampled tables).

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use microformal::Error;

use output::Output;

#[derive(Parser, Debug)]
#[command(name = "microformal", version, about = "Thick morphisms, Weyl algebras and quadratic actions")]
struct Cli {
    #[command(subcommand)]
    group: Group,
    #[command(flatten)]
    opts: Opts,
}

/// Settings shared by every subcommand.
#[derive(Args, Clone, Debug)]
pub struct Opts {
    /// Truncation bound for source positions.
    #[arg(long, global = true, default_value_t = 4)]
    pub trunc_x: u32,
    /// Truncation bound for momenta.
    #[arg(long, global = true, default_value_t = 4)]
    pub trunc_q: u32,
    /// Order in hbar.
    #[arg(long, global = true, default_value_t = microformal::thick_quantum::DEFAULT_HBAR_ORDER)]
    pub trunc_hbar: u32,
    /// Order in the formal parameters eps / lambda.
    #[arg(long, global = true, default_value_t = 3)]
    pub order: u32,
    /// Tolerance for numeric solves.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub tol: f64,
    /// Integration steps for evolutions.
    #[arg(long, global = true, default_value_t = microformal::dynamics::DEFAULT_STEPS)]
    pub steps: u32,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; tables default to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Group {
    /// Classical thick morphisms.
    Thick {
        #[command(subcommand)]
        cmd: commands::thick::Cmd,
    },
    /// Quantum thick morphisms.
    Quantum {
        #[command(subcommand)]
        cmd: commands::quantum::Cmd,
    },
    /// Weyl algebra and ordering cocycle.
    Weyl {
        #[command(subcommand)]
        cmd: commands::weyl::Cmd,
    },
    /// Hamilton–Jacobi and Schrödinger evolution.
    Dynamics {
        #[command(subcommand)]
        cmd: commands::dynamics::Cmd,
    },
    /// Quadratic actions of linear canonical relations.
    Spinor {
        #[command(subcommand)]
        cmd: commands::spinor::Cmd,
    },
}

/// Input file given with `--in`.
#[derive(Args, Clone, Debug)]
pub struct Input {
    #[arg(long = "in")]
    pub input: PathBuf,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Shape(_) | Error::Parity(_) => 2,
        Error::Internal(_) => 4,
        _ => 3,
    }
}

fn run(cli: Cli) -> microformal::Result<()> {
    let o = &cli.opts;
    if !(o.tol > 0.0) {
        return Err(Error::Parse(format!("tolerance must be positive, got {}", o.tol)));
    }
    let out: Output = match cli.group {
        Group::Thick { cmd } => commands::thick::run(cmd, o)?,
        Group::Quantum { cmd } => commands::quantum::run(cmd, o)?,
        Group::Weyl { cmd } => commands::weyl::run(cmd, o)?,
        Group::Dynamics { cmd } => commands::dynamics::run(cmd, o)?,
        Group::Spinor { cmd } => commands::spinor::run(cmd, o)?,
    };
    out.write(o.format, o.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("microformal: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
