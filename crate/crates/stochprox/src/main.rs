use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stochprox::cli::{cmd_run, cmd_selftest, cmd_validate, RunFlags};

#[derive(Parser)]
#[command(
    name = "stochprox",
    version,
    about = "Stochastic proximal splitting experiment runner"
)]
struct Cli {
    /// Number of worker threads for replication-level parallelism
    #[arg(long, global = true, env = "STOCHPROX_JOBS")]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file
    Run {
        config: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config output directory
        #[arg(long)]
        output: Option<PathBuf>,
        /// Permit schedules that fail the Robbins-Monro conditions
        #[arg(long)]
        allow_invalid_schedule: bool,
    },
    /// Parse a config and report assumption checks without running
    Validate {
        config: PathBuf,
        /// Permit schedules that fail the Robbins-Monro conditions
        #[arg(long)]
        allow_invalid_schedule: bool,
    },
    /// Certify the closed-form operators against an independent oracle
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("cannot configure {jobs} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let code = match cli.command {
        Command::Run {
            config,
            seed,
            output,
            allow_invalid_schedule,
        } => cmd_run(
            &config,
            &RunFlags {
                seed,
                output,
                allow_invalid_schedule,
            },
        ),
        Command::Validate {
            config,
            allow_invalid_schedule,
        } => cmd_validate(
            &config,
            &RunFlags {
                seed: None,
                output: None,
                allow_invalid_schedule,
            },
        ),
        Command::Selftest => cmd_selftest(),
    };
    ExitCode::from(code as u8)
}
