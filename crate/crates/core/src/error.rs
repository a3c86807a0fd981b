use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("probability {0} outside the open unit interval")]
    Domain(f64),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("{0} did not converge")]
    Convergence(&'static str),
    #[error("catalog filter removed every basis function")]
    EmptyCatalog,
    #[error("knots must be strictly increasing inside [0, 1]")]
    KnotOrder,
    #[error("design matrix is rank deficient on the working set")]
    RankDeficient,
    #[error("constraint set is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("{0}: iteration limit reached")]
    IterationLimit(&'static str),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("model is degenerate: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
