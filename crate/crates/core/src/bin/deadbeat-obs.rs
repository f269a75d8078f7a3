use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use deadbeat::cli::{self, CliResult, Overrides, SweepMode};

#[derive(Parser)]
#[command(name = "deadbeat-obs", version, about = "Hybrid dead-beat observer simulations")]
struct Args {
    #[command(subcommand)]
    command: Command,
    /// Override the integration step (s).
    #[arg(long, global = true)]
    h: Option<f64>,
    /// Override the output path prefix.
    #[arg(long, global = true)]
    out_prefix: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the plant and run the observer.
    Simulate { config: PathBuf },
    /// Frequency-estimation error sweep.
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
    },
    /// Gram-matrix report on one window.
    Observability { config: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Phase,
    Horizon,
}

fn run(args: Args) -> CliResult<()> {
    let overrides = Overrides { h: args.h, out_prefix: args.out_prefix };
    match args.command {
        Command::Simulate { config } => {
            let summary = cli::cmd_simulate(cli::load_config(&config, &overrides)?)?;
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
        }
        Command::Sweep { config, mode } => {
            let mode = match mode {
                Mode::Phase => SweepMode::Phase,
                Mode::Horizon => SweepMode::Horizon,
            };
            let (_, summary) = cli::cmd_sweep(cli::load_config(&config, &overrides)?, mode)?;
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
        }
        Command::Observability { config } => {
            let report = cli::cmd_observability(cli::load_config(&config, &overrides)?)?;
            print!("{}", cli::format_report(&report));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
