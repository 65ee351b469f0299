use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The double-centred matrix has a negative eigenvalue beyond tolerance.
    #[error("matrix is not a Euclidean distance matrix: most negative eigenvalue of B(D) is {min_eigenvalue:e}")]
    NotEdm { min_eigenvalue: f64 },

    #[error("beta = {beta} is below the admissible bound {min_beta} (mu0 = {mu0})")]
    BetaBelowBound { beta: f64, min_beta: f64, mu0: f64 },

    #[error("numerical failure at iteration {iteration}: {message}")]
    Numerical { iteration: usize, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
