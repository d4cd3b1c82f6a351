use thiserror::Error;

/// Errors reported by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole of {function} at {at}")]
    Pole { function: &'static str, at: f64 },

    #[error("{0} did not converge")]
    NonConvergence(&'static str),

    #[error("grid mismatch: weights use h = {weights}, field uses h = {field}")]
    GridMismatch { weights: f64, field: f64 },

    #[error("index range {start}..{end} outside the field window of length {len}")]
    OutOfBounds { start: i64, end: i64, len: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("overflow in {0}")]
    Overflow(&'static str),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("time step {dt} violates the stability restriction dt <= {limit}")]
    Cfl { dt: f64, limit: f64 },

    #[error("solution diverged at t = {0}")]
    Diverged(f64),

    #[error("fit failure: {0}")]
    Fit(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad input or configuration rather than by a
    /// numerical failure. The CLI maps these to exit code 2.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Pole { .. }
                | Error::GridMismatch { .. }
                | Error::OutOfBounds { .. }
                | Error::Unsupported(_)
                | Error::Cfl { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
