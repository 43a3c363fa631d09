//! Command-line front end for the tail-estimation library: flat-file
//! configuration, four subcommands, and deterministic JSON reports.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{cmd_estimate, cmd_optimize, cmd_solve, cmd_sweep, CommandOutput};
pub use config::{parse_pairs, resolve, Overrides, RunConfig};
pub use error::{CliError, Result};

/// Dispatches a subcommand by name against a resolved configuration.
pub fn run_command(name: &str, config: &RunConfig) -> Result<CommandOutput> {
    match name {
        "solve" => cmd_solve(config),
        "optimize" => cmd_optimize(config),
        "estimate" => cmd_estimate(config),
        "sweep" => cmd_sweep(config),
        other => Err(CliError::config(
            "command",
            format!("unknown command `{other}`"),
        )),
    }
}
