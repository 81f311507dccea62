//! `cycdiag`: cyclic diagonals, their coefficients and the power operations they induce.

mod commands;
mod selftest;
mod verify;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "cycdiag", version, about = "Connected r-cyclic diagonals on augmented semi-simplicial sets")]
struct Cli {
    /// Upper bound on worker threads.
    #[arg(long, global = true, env = "CYCDIAG_THREADS")]
    threads: Option<usize>,
    /// Print JSON on one line.
    #[arg(long, global = true)]
    compact: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expand μ(ρ^j e_q ⊗ cell) on a complex.
    Coproduct(commands::CoproductArgs),
    /// Coefficient of the term of one pair (U, A) on the universal simplex.
    Coefficient(commands::CoefficientArgs),
    /// Apply P^i to cohomology classes.
    Power(commands::PowerArgs),
    /// Count or list cyclic straightenings.
    Straightenings(commands::StraighteningsArgs),
    /// Run a property suite.
    Verify(verify::VerifyArgs),
    /// Replay the worked examples.
    Selftest,
}

/// What a command produced: JSON for stdout, a one-line summary for stderr, and whether
/// every check it ran passed.
pub struct Outcome {
    pub json: serde_json::Value,
    pub summary: String,
    pub passed: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("warning: {e}");
        }
    }
    let result = match cli.command {
        Command::Coproduct(a) => commands::coproduct(&a),
        Command::Coefficient(a) => commands::coefficient(&a),
        Command::Power(a) => commands::power(&a),
        Command::Straightenings(a) => commands::straightenings(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Selftest => selftest::run(),
    };
    match result {
        Ok(out) => {
            let text = if cli.compact {
                serde_json::to_string(&out.json)
            } else {
                serde_json::to_string_pretty(&out.json)
            };
            println!("{}", text.expect("JSON values always serialize"));
            eprintln!("{}", out.summary);
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
