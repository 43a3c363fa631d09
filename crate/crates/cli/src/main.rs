use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rarepde_cli::config::{parse_pairs, resolve, Overrides};
use rarepde_cli::{run_command, CliError};

/// Sharp tail estimates for functionals of elliptic PDEs with lognormal
/// coefficients, cross-checked by Monte Carlo.
#[derive(Debug, Parser)]
#[command(name = "rarepde", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Path to a flat `key = value` configuration file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Output directory (overrides `output.dir`).
    #[arg(long, value_name = "DIR")]
    output: Option<String>,

    /// RNG seed (overrides `mc.seed`).
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,

    /// Suppress the report echo on stdout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the baseline PDE and report the zero-noise quantities.
    Solve(CommonArgs),
    /// Run the constrained rate minimization.
    Optimize(CommonArgs),
    /// Compare the asymptotic tail estimate against Monte Carlo.
    Estimate(CommonArgs),
    /// Repeat the estimate across a list of noise amplitudes.
    Sweep(CommonArgs),
}

impl Command {
    fn split(&self) -> (&'static str, &CommonArgs) {
        match self {
            Command::Solve(args) => ("solve", args),
            Command::Optimize(args) => ("optimize", args),
            Command::Estimate(args) => ("estimate", args),
            Command::Sweep(args) => ("sweep", args),
        }
    }
}

fn execute(name: &'static str, args: &CommonArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)?;
    let pairs = parse_pairs(&text)?;
    let overrides = Overrides {
        seed: args.seed,
        out_dir: args.output.clone(),
    };
    let config = resolve(pairs, &overrides)?;
    let output = run_command(name, &config)?;
    if !args.quiet {
        print!("{}", output.json);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = cli.command.split();
    match execute(name, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
