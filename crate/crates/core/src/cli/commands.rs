//! `solve`, `sweep` and `check`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};

use rayon::prelude::*;

use crate::cli::checks::{run_suite, SuiteOutcome};
use crate::cli::config::RunConfig;
use crate::cli::report::{write_orbit_csv, Report};
use crate::error::{Error, Result};
use crate::minimizer::{refine_domain, SolveReport};
use crate::potential::{ProblemSpec, WeightFamily};
use crate::verifier::verify;

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitStatus {
    Success = 0,
    /// Invalid configuration, or an I/O failure.
    ConfigError = 1,
    /// Converged, but a verifier check failed (or a check suite failed).
    ChecksFailed = 2,
    NotConverged = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Reads `path` (or the defaults) and applies command-line overrides.
pub fn load_config(
    path: Option<&FsPath>,
    out: Option<PathBuf>,
    seed: Option<u64>,
) -> Result<RunConfig> {
    let mut config = match path {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(out) = out {
        config.output.dir = out;
    }
    if let Some(seed) = seed {
        config.solver.seed = seed;
    }
    Ok(config)
}

/// Refines and verifies one problem without touching the filesystem.
pub fn solve_problem(config: &RunConfig, spec: &ProblemSpec) -> Result<(Report, Vec<SolveReport>)> {
    let grid = config.grid_spec()?;
    let levels = refine_domain(
        spec,
        &config.solver,
        &grid,
        config.refine.tol,
        config.refine.max_doublings,
    )?;
    let last = levels
        .last()
        .expect("refine_domain returns at least one level");
    let verdict = verify(&last.orbit, spec, config.solver.grad_tol)?;
    Ok((Report::new(&levels, verdict), levels))
}

fn status_of(report: &Report) -> ExitStatus {
    if !report.converged {
        ExitStatus::NotConverged
    } else if !report.checks.all_pass() {
        ExitStatus::ChecksFailed
    } else {
        ExitStatus::Success
    }
}

fn write_outputs(dir: &FsPath, report: &Report, levels: &[SolveReport], orbit: bool) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), report.to_json()?)?;
    if orbit {
        let last = levels.last().expect("nonempty");
        let mut w = BufWriter::new(File::create(dir.join("orbit.csv"))?);
        write_orbit_csv(&last.orbit, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

/// Runs `solve` and returns the report together with its exit status.
pub fn solve(config: &RunConfig) -> Result<(Report, ExitStatus)> {
    config.validate()?;
    let spec = config.problem_spec()?;
    let (report, levels) = solve_problem(config, &spec)?;
    write_outputs(
        &config.output.dir,
        &report,
        &levels,
        config.output.write_orbit,
    )?;
    let status = status_of(&report);
    Ok((report, status))
}

pub fn run_solve(config: &RunConfig) -> ExitStatus {
    match solve(config) {
        Ok((report, status)) => {
            println!(
                "action {:.12e}  grad_norm {:.3e}  iterations {}  T {}  converged {}",
                report.action.total,
                report.grad_norm,
                report.iterations,
                report.grid.half_length,
                report.converged
            );
            let c = report.checks;
            match status {
                ExitStatus::NotConverged => {
                    eprintln!(
                        "solver stopped without converging: {:?}",
                        report.stop_reason
                    )
                }
                ExitStatus::ChecksFailed => eprintln!(
                    "verifier failed: residual_ok={} window_bound_ok={} qdot_bound_ok={}",
                    c.residual_ok, c.window_bound_ok, c.qdot_bound_ok
                ),
                _ => {}
            }
            status
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::ConfigError
        }
    }
}

/// One row of `summary.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub alpha: f64,
    pub family: WeightFamily,
    pub amplitude: f64,
    pub dir: PathBuf,
    /// `Err` holds the message of a cell that could not be solved.
    pub outcome: std::result::Result<Report, String>,
}

impl SweepCell {
    pub fn converged(&self) -> bool {
        matches!(&self.outcome, Ok(r) if r.converged)
    }

    fn csv_row(&self) -> String {
        match &self.outcome {
            Ok(r) => format!(
                "{},{},{},{:e},{:e},{},{:e},{}",
                self.alpha,
                self.family,
                self.amplitude,
                r.action.total,
                r.grad_norm,
                r.converged,
                r.residual.linf,
                r.decay
                    .tail_rate
                    .map(|x| format!("{x:e}"))
                    .unwrap_or_default()
            ),
            Err(_) => format!(
                "{},{},{},,,false,,",
                self.alpha, self.family, self.amplitude
            ),
        }
    }
}

pub const SUMMARY_HEADER: &str =
    "alpha,family,amplitude,action,grad_norm,converged,residual_linf,tail_rate";

fn cell_dir(root: &FsPath, alpha: f64, family: WeightFamily, amplitude: Option<f64>) -> PathBuf {
    match amplitude {
        None => root.join(format!("cell_{alpha}_{family}")),
        Some(c) => root.join(format!("cell_{alpha}_{family}_a{c}")),
    }
}

fn sweep_cell(
    config: &RunConfig,
    alpha: f64,
    family: WeightFamily,
    amplitude: f64,
    dir: PathBuf,
) -> SweepCell {
    let outcome = (|| {
        let weight = config.weight.profile(family, amplitude)?;
        let spec = ProblemSpec::new(alpha, config.problem.dim, weight)?;
        let (report, levels) = solve_problem(config, &spec)?;
        write_outputs(&dir, &report, &levels, config.output.write_orbit)?;
        Ok::<_, Error>(report)
    })()
    .map_err(|e| {
        let msg = e.to_string();
        let _ = fs::create_dir_all(&dir)
            .and_then(|_| fs::write(dir.join("error.txt"), format!("{msg}\n")));
        msg
    });
    SweepCell {
        alpha,
        family,
        amplitude,
        dir,
        outcome,
    }
}

/// Runs every `(alpha, family, amplitude)` cell on `workers` threads and
/// writes `summary.csv` once all of them finish.
pub fn sweep(config: &RunConfig) -> Result<Vec<SweepCell>> {
    config.validate_sweep()?;
    let s = &config.sweep;
    let root = &config.output.dir;
    let tag_amplitude = s.amplitudes.len() > 1;
    let mut jobs = Vec::new();
    for &alpha in &s.alphas {
        for &family in &s.families {
            for &amp in &s.amplitudes {
                let dir = cell_dir(root, alpha, family, tag_amplitude.then_some(amp));
                jobs.push((alpha, family, amp, dir));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(s.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", s.workers)))?;
    let cells: Vec<SweepCell> = pool.install(|| {
        jobs.into_par_iter()
            .map(|(alpha, family, amp, dir)| sweep_cell(config, alpha, family, amp, dir))
            .collect()
    });
    fs::create_dir_all(root)?;
    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    for c in &cells {
        summary.push_str(&c.csv_row());
        summary.push('\n');
    }
    fs::write(root.join("summary.csv"), summary)?;
    Ok(cells)
}

pub fn run_sweep(config: &RunConfig) -> ExitStatus {
    match sweep(config) {
        Ok(cells) => {
            for c in &cells {
                match &c.outcome {
                    Ok(r) => println!(
                        "alpha {:<4} {:<8} amplitude {:<6} action {:.9e} converged {}",
                        c.alpha, c.family, c.amplitude, r.action.total, r.converged
                    ),
                    Err(msg) => eprintln!(
                        "alpha {} {} amplitude {}: {msg}",
                        c.alpha, c.family, c.amplitude
                    ),
                }
            }
            if cells.iter().all(SweepCell::converged) {
                ExitStatus::Success
            } else {
                ExitStatus::NotConverged
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::ConfigError
        }
    }
}

/// Runs the selected suites with the configured seed and writes `check.json`.
pub fn check(config: &RunConfig) -> Result<Vec<SuiteOutcome>> {
    config.validate_check()?;
    let spec = config.problem_spec()?;
    let grid = config.grid_spec()?;
    let outcomes = config
        .check
        .suites
        .iter()
        .map(|&s| run_suite(s, &spec, &grid, config.check.samples, config.solver.seed))
        .collect::<Result<Vec<_>>>()?;
    let dir = &config.output.dir;
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(&outcomes).map_err(std::io::Error::other)?;
    fs::write(dir.join("check.json"), json + "\n")?;
    Ok(outcomes)
}

/// Fixed-width pass/fail table.
pub fn format_table(outcomes: &[SuiteOutcome]) -> String {
    let mut out = format!(
        "{:<11} {:<36} {:<6} {}\n",
        "suite", "check", "result", "detail"
    );
    for o in outcomes {
        for r in &o.rows {
            out.push_str(&format!(
                "{:<11} {:<36} {:<6} {}\n",
                o.suite.as_str(),
                r.name,
                if r.passed { "pass" } else { "FAIL" },
                r.detail
            ));
        }
    }
    out
}

pub fn run_check(config: &RunConfig) -> ExitStatus {
    match check(config) {
        Ok(outcomes) => {
            print!("{}", format_table(&outcomes));
            if outcomes.iter().all(SuiteOutcome::passed) {
                ExitStatus::Success
            } else {
                ExitStatus::ChecksFailed
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitStatus::ConfigError
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(dir: &FsPath) -> RunConfig {
        let mut c = RunConfig::default();
        c.grid.half_length = 10.0;
        c.grid.n_points = 1001;
        c.refine.max_doublings = 1;
        c.output.dir = dir.to_path_buf();
        c
    }

    #[test]
    fn overrides_apply() {
        let c = load_config(None, Some("elsewhere".into()), Some(7)).unwrap();
        assert_eq!(c.output.dir, PathBuf::from("elsewhere"));
        assert_eq!(c.solver.seed, 7);
    }

    #[test]
    fn solve_writes_both_files() {
        let tmp = tempfile::tempdir().unwrap();
        let (report, status) = solve(&small(tmp.path())).unwrap();
        assert_eq!(status, ExitStatus::Success);
        assert!(report.action.total < 0.0);
        assert_eq!(report.refinement.len(), 2);
        assert!(tmp.path().join("report.json").exists());
        let csv = fs::read_to_string(tmp.path().join("orbit.csv")).unwrap();
        assert!(csv.starts_with("t,q_1,qdot_1\n"));
    }

    #[test]
    fn bad_alpha_is_a_config_error() {
        let tmp = tempfile::tempdir().unwrap();
        let mut c = small(tmp.path());
        c.problem.alpha = 2.5;
        assert_eq!(run_solve(&c), ExitStatus::ConfigError);
        assert!(!tmp.path().join("report.json").exists());
    }

    #[test]
    fn cell_directories() {
        let root = FsPath::new("out");
        assert_eq!(
            cell_dir(root, 1.5, WeightFamily::SechSquared, None),
            PathBuf::from("out/cell_1.5_sech2")
        );
        assert_eq!(
            cell_dir(root, 1.1, WeightFamily::Rational, Some(0.01)),
            PathBuf::from("out/cell_1.1_rational_a0.01")
        );
    }

    #[test]
    fn table_marks_failures() {
        use crate::cli::checks::{CheckRow, Suite};
        let o = SuiteOutcome {
            suite: Suite::Scaling,
            rows: vec![CheckRow {
                name: "x".into(),
                passed: false,
                detail: "d".into(),
            }],
        };
        let t = format_table(&[o]);
        assert!(t.lines().nth(1).unwrap().contains("FAIL"));
    }
}
