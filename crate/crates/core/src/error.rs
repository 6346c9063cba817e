use thiserror::Error;

/// Errors raised by the library. Solver non-convergence is not an error; it
/// is reported through [`crate::minimizer::SolveReport::converged`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid solver configuration: {0}")]
    InvalidSolver(String),

    #[error("dimension mismatch: path has dimension {path}, problem has dimension {problem}")]
    DimensionMismatch { path: usize, problem: usize },

    #[error("zero path: {0}")]
    ZeroPath(&'static str),

    #[error("domain too small: half length {0} < 1")]
    DomainTooSmall(f64),

    #[error("tail below floor: fewer than {min_nodes} tail nodes exceed {floor:e}")]
    TailBelowFloor { floor: f64, min_nodes: usize },

    #[error("csv: {0}")]
    Csv(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
