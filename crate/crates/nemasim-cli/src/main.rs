//! `nemasim`: age-structured banana plantation nematode infestation
//! simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nemasim_cli::{analyze, compare, run_scenario, verify_suite, Suite};

#[derive(Parser)]
#[command(
    name = "nemasim",
    version,
    about = "Simulate nematode infestation dynamics in an age-structured banana plantation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write time series, plant fields, production and
    /// analysis files to its output directory
    Simulate {
        /// Scenario configuration file
        config: PathBuf,
    },
    /// Compute the threshold quantities (sigma, N, lambda*, N0) for a
    /// parameter set without simulating
    Analyze {
        /// Scenario configuration file
        config: PathBuf,
    },
    /// Run several scenarios on a shared grid and tabulate production
    /// losses and gains against the first
    Compare {
        /// Baseline scenario configuration
        baseline: PathBuf,
        /// Scenarios to compare against the baseline
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
    },
    /// Run a verification suite; exits 0 only if its criteria hold
    Verify {
        /// Which suite to run
        #[arg(value_enum)]
        suite: Suite,
        /// Scenario configuration file
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate { config } => run_scenario(&config).map(|()| 0),
        Command::Analyze { config } => analyze(&config).map(|()| 0),
        Command::Compare {
            baseline,
            scenarios,
        } => compare(&baseline, &scenarios).map(|()| 0),
        Command::Verify { suite, config } => verify_suite(suite, &config),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("nemasim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
