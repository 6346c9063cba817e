use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use homoclinic::cli::{load_config, run_check, run_solve, run_sweep, ExitStatus};

/// Homoclinic orbits of q'' + V_q(t, q) = 0 by direct minimization of the action.
#[derive(Parser)]
#[command(name = "homoclinic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem with domain refinement and verify the orbit.
    Solve(Overrides),
    /// Solve every (alpha, family, amplitude) cell of the sweep block.
    Sweep(Overrides),
    /// Run the property batteries.
    Check(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// TOML configuration file; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for perturbed starts and check batteries.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() {
                ExitStatus::ConfigError.code()
            } else {
                0
            };
            let _ = e.print();
            return ExitCode::from(status as u8);
        }
    };
    let (run, o): (fn(&_) -> ExitStatus, Overrides) = match cli.command {
        Command::Solve(o) => (run_solve, o),
        Command::Sweep(o) => (run_sweep, o),
        Command::Check(o) => (run_check, o),
    };
    let status = match load_config(o.config.as_deref(), o.out, o.seed) {
        Ok(config) => run(&config),
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::ConfigError
        }
    };
    ExitCode::from(status.code() as u8)
}
