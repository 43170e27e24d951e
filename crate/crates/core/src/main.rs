use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gfix::cli::{self, Command, Overrides, EXIT_CONFIG};

/// G-metric hypothesis checks and a common fixed point solver for four maps.
#[derive(Parser)]
#[command(name = "gfix", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the axiom, property and hypothesis checks of a scenario.
    Check(RunArgs),
    /// Run the coupled iteration and certify the limit.
    Solve(RunArgs),
    /// Validate a finite G-metric table and report asymmetric pairs.
    Table(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file, or a built-in name: example-2.6, example-2.6-sum, table-3pt, discrete-3pt.
    config: String,
    #[arg(long)]
    tol: Option<f64>,
    /// Sampling seed [default: run.seed, then GFIX_SEED, then 0].
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_max: Option<usize>,
    /// Comma-separated start points for the multi-start uniqueness check.
    #[arg(long, value_delimiter = ',')]
    starts: Option<Vec<f64>>,
    /// Abort when a hypothesis check fails.
    #[arg(long)]
    strict: bool,
    /// Contraction constant, e.g. 0.5 or 1/3.
    #[arg(long)]
    constant: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Human,
    Structured,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Check(a) => (Command::Check, a),
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Table(a) => (Command::Table, a),
    };
    let overrides = Overrides {
        tol: args.tol,
        seed: args.seed,
        n_max: args.n_max,
        starts: args.starts,
        strict: args.strict,
        constant: args.constant,
        env_seed: std::env::var("GFIX_SEED").ok(),
    };
    let report = match cli::run(command, &args.config, &overrides) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("gfix: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let text = match args.format {
        Format::Human => report.to_human(),
        Format::Structured => report.to_json(),
    };
    match &args.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("gfix: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_CONFIG as u8);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::from(report.exit_code as u8)
}
