//! `exlab`: exact maximin optimization and numerical checks from the command line.
//!
//! Exit codes: 0 on success, 1 when a check fails, 2 on a usage error or an
//! unreadable input.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use exlab_core::reproduce::DEFAULT_SEED;
use exlab_core::sums::Sign;

#[derive(Parser, Debug)]
#[command(name = "exlab", version, about = "Exact exponent optimization and numerical checks")]
pub struct Cli {
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve a maximin program exactly.
    Optimize {
        file: PathBuf,
        /// Print the optimal point.
        #[arg(long)]
        witness: bool,
        /// Print branch enumeration counts.
        #[arg(long)]
        branches: bool,
    },
    /// Check a witness file against a program.
    Certify { program: PathBuf, witness: PathBuf },
    /// Ramanujan's tau(n).
    Tau { n: usize },
    /// Normalized coefficient tau(n) / n^(11/2).
    Lambda { n: usize },
    /// Kloosterman sum S(m, n; q) for an odd prime q.
    Kloosterman {
        #[arg(allow_hyphen_values = true)]
        m: i64,
        #[arg(allow_hyphen_values = true)]
        n: i64,
        q: u64,
    },
    /// Bump weight W(x).
    Weight {
        #[arg(long, allow_hyphen_values = true)]
        x: f64,
    },
    /// Fourier transform of the bump weight at frequency y.
    WeightFourier {
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Compare the residue-bucket and character-detection evaluations of E±.
    VerifyEpm {
        #[command(flatten)]
        modulus: ModulusArgs,
        #[arg(long)]
        m: f64,
        #[arg(long)]
        n: f64,
    },
    /// Compare the direct triple sum C± with its Poisson-transformed form.
    VerifyPoisson {
        #[command(flatten)]
        modulus: ModulusArgs,
        #[arg(long)]
        n1: f64,
        #[arg(long)]
        n2: f64,
        #[arg(long)]
        m: f64,
        /// Frequency cutoff; chosen from the tail bound when omitted.
        #[arg(long)]
        kcut: Option<u64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Normalized Wilton sums max |sum_{n<=N} lambda(n) e(n alpha)| / sqrt(N).
    Wilton {
        /// Largest N; N runs over powers of two up to it.
        #[arg(long)]
        nmax: usize,
        /// `default` for the 256-point grid, or G for the grid j/G.
        #[arg(long, default_value = "default")]
        grid: String,
    },
    /// Diagnostic scans.
    #[command(subcommand)]
    Scan(ScanCommand),
    /// Run every acceptance criterion and print a pass/fail table.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug)]
pub struct ModulusArgs {
    /// Odd prime modulus.
    #[arg(long)]
    pub q: u64,
    /// `+` or `-`.
    #[arg(long, allow_hyphen_values = true)]
    pub sign: Sign,
}

#[derive(Subcommand, Debug)]
pub enum ScanCommand {
    /// |E±| against sqrt(MN)/q on dyadic M, N with MN <= total.
    EBound {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        total: f64,
    },
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// Directory holding the bundled programs and witnesses.
    #[arg(long, default_value = "programs")]
    pub programs: PathBuf,
    /// Seed for the randomized spot checks.
    #[arg(long, env = "SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(&cli.command) {
        Ok(outcome) => {
            let body = if cli.json {
                serde_json::to_string_pretty(&outcome.json).expect("JSON values serialize") + "\n"
            } else {
                outcome.text
            };
            // ignore a closed pipe
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            for warning in &outcome.warnings {
                eprintln!("warning: {warning}");
            }
            ExitCode::from(if outcome.passed { 0 } else { 1 })
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
