mod artifacts;
mod commands;
mod config;
mod plot;

use clap::Parser;
use commands::{CliError, Command};
use config::{ExperimentConfig, Overrides};

/// Effective resistance experiments for long-range percolation on Z.
///
/// Settings come from `--config` (JSON), then `LRP_*` environment
/// variables, then flags, later sources winning.
#[derive(Debug, Parser)]
#[command(name = "lrp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
    /// Print the resolved configuration and exit.
    #[arg(long, global = true)]
    print_config: bool,
}

fn fail(e: CliError) -> ! {
    eprintln!("{}", e.to_json());
    std::process::exit(e.code());
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => fail(CliError::Usage(e.to_string())),
    };
    let config = ExperimentConfig::resolve(&cli.overrides).unwrap_or_else(|m| fail(CliError::Usage(m)));
    if cli.print_config {
        println!("{}", serde_json::to_string_pretty(&config).expect("config serializes"));
        return;
    }
    if let Some(t) = config.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            fail(CliError::Usage(e.to_string()));
        }
    }
    match commands::run(cli.command, &config) {
        Ok(manifest) => println!("{}", manifest.display()),
        Err(e) => fail(e),
    }
}
