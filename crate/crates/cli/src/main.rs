use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use smf_droplet_cli::config::{parse_override, RunConfig};
use smf_droplet_cli::run::{self, CliError};

#[derive(Parser)]
#[command(
    name = "smfdrop",
    version,
    about = "Self-bound BEC droplets in single-mirror feedback"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Configuration file (flat key = value).
    #[arg(long)]
    config: PathBuf,
    /// Replace one configuration value, e.g. `--override a_bar=2e-5`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured mode and write its outputs.
    Run(ConfigArgs),
    /// Print derived quantities without simulating.
    Predict(ConfigArgs),
    /// Print the time-step halving table.
    Convergence(ConfigArgs),
}

fn load(args: &ConfigArgs) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", args.config.display())))?;
    let overrides = args
        .overrides
        .iter()
        .map(|o| parse_override(o))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    RunConfig::parse(&text, &overrides).map_err(|e| CliError::Config(e.to_string()))
}

fn dispatch(cli: &Cli) -> Result<String, CliError> {
    match &cli.command {
        Command::Run(a) => run::run(&load(a)?),
        Command::Predict(a) => run::predict(&load(a)?),
        Command::Convergence(a) => run::convergence(&load(a)?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(out) => {
            println!("{}", out.trim_end());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("smfdrop: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
