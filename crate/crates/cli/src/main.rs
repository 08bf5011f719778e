mod analyze;
mod demo;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nftgame_core::scenario::ScenarioError;
use nftgame_core::simulation::SimError;

/// Simulate and analyse NFT game economies.
///
/// Every command is deterministic: randomness comes from `--seed`, which
/// defaults to the scenario's seed and otherwise to 0.
#[derive(Debug, Parser)]
#[command(name = "nftgame", version)]
struct Cli {
    /// Master seed for all random draws.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write snapshots.csv, events.jsonl and summary.json.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Override the scenario's step count.
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate one closed-form quantity and print it as JSON.
    Analyze {
        #[command(subcommand)]
        what: analyze::Analysis,
    },
    /// Run a worked example and compare it with the reference figures.
    Demo { name: demo::DemoName },
}

/// Bad user input that passed argument parsing.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ScenarioError>().is_some() || err.downcast_ref::<InputError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<SimError>() {
        Some(SimError::InvariantViolation { .. }) => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, steps, out } => simulate::run(&config, cli.seed, steps, &out),
        Command::Analyze { what } => analyze::run(what),
        Command::Demo { name } => demo::run(name, cli.seed.unwrap_or(0)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let violation = SimError::InvariantViolation { step: 4, detail: "x".into(), record: None };
        assert_eq!(exit_code(&anyhow::Error::from(violation).context("run")), 3);
        assert_eq!(exit_code(&SimError::InvalidConfig("steps".into()).into()), 2);
        assert_eq!(exit_code(&ScenarioError::Version { found: 9 }.into()), 2);
        assert_eq!(exit_code(&InputError("bad".into()).into()), 2);
        assert_eq!(exit_code(&anyhow::anyhow!("disk full")), 1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
