//! `coker`: limit laws, normal forms, measure decompositions, verification sweeps and
//! simulations for random matrices over finite chain rings.
//!
//! Exit codes: 0 on success, 1 when a verification fails or a computation cannot
//! complete, 2 on a usage or input error.

mod commands;
mod config;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::render::Format;

#[derive(Parser, Debug)]
#[command(name = "coker", version, about = "Cokernels of random matrices over finite chain rings")]
pub struct Cli {
    /// Emit a JSON document (schema "v1").
    #[arg(long, global = true, conflicts_with = "csv")]
    json: bool,
    /// Emit a flat CSV table.
    #[arg(long, global = true)]
    csv: bool,
    /// Write output here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// JSON file supplying defaults for run parameters; unknown keys are rejected.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Limit law of the cokernel, most likely module types first.
    Dist(commands::DistArgs),
    /// Smith normal form exponents.
    Snf(MatrixArgs),
    /// Isomorphism type of the cokernel.
    Coker(MatrixArgs),
    /// Determinant of a square matrix.
    Det(MatrixArgs),
    /// Canonical (Howell) form of the column span.
    Span(MatrixArgs),
    /// Orthogonal decomposition of a signed measure on a module.
    Decompose(commands::DecomposeArgs),
    /// Verification sweeps; exit code 1 on any failed check.
    #[command(subcommand)]
    Verify(VerifyCommand),
    /// Sample i.i.d. and Haar matrices and compare an invariant.
    Simulate(commands::SimulateArgs),
    /// Fit a geometric decay rate to a TV series.
    Rate(commands::RateArgs),
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// Decomposition, orthogonality and inequality checks on random measures.
    Measures(commands::VerifyMeasuresArgs),
    /// Exact moment-tail sums, their decay, and uniform replacement.
    Moment(commands::VerifyMomentArgs),
    /// Exact column-swapping distances and their decay rate.
    Swap(commands::VerifySwapArgs),
}

#[derive(Args, Debug)]
pub struct MatrixArgs {
    /// Ring such as `Z/8`, `F4[t]/t^2` or `F9`.
    #[arg(long)]
    ring: String,
    /// Rows separated by `;`, entries by `,`.
    #[arg(long)]
    matrix: String,
}

fn run(cli: &Cli) -> coker_core::Result<render::Rendered> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match &cli.command {
        Command::Dist(a) => commands::dist(a),
        Command::Snf(a) => commands::snf(&a.ring, &a.matrix),
        Command::Coker(a) => commands::coker(&a.ring, &a.matrix),
        Command::Det(a) => commands::det(&a.ring, &a.matrix),
        Command::Span(a) => commands::span(&a.ring, &a.matrix),
        Command::Decompose(a) => commands::decompose(a),
        Command::Verify(VerifyCommand::Measures(a)) => commands::verify_measures(a, &config),
        Command::Verify(VerifyCommand::Moment(a)) => commands::verify_moment(a, &config),
        Command::Verify(VerifyCommand::Swap(a)) => commands::verify_swap(a, &config),
        Command::Simulate(a) => commands::simulate(a, &config),
        Command::Rate(a) => commands::rate(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = if cli.json {
        Format::Json
    } else if cli.csv {
        Format::Csv
    } else {
        Format::Table
    };
    match run(&cli) {
        Ok(rendered) => {
            if let Err(e) = rendered.emit(format, cli.out.as_deref()) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            if rendered.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
