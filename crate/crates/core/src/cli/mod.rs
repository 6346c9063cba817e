//! Configuration, commands and serialization.

pub mod checks;
pub mod commands;
pub mod config;
pub mod report;

pub use checks::{run_suite, CheckRow, Suite, SuiteOutcome};
pub use commands::{
    check, load_config, run_check, run_solve, run_sweep, solve, solve_problem, sweep, ExitStatus,
    SweepCell,
};
pub use config::RunConfig;
pub use report::{write_orbit_csv, Report, REPORT_SCHEMA};
