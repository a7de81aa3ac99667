use std::fmt;

use crate::solver::SolveResult;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed input: wrong vector length, bad index, inconsistent system.
    #[error("input error: {0}")]
    Input(String),

    /// Polynomial, system or experiment text that failed to parse.
    #[error("parse error at {location}: {message}")]
    Parse { location: Location, message: String },

    /// The m×m block of the discrete multiplier is numerically singular.
    #[error("singular multiplier minor (det = {det:e}) between {x_prev:?} and {x_next:?}")]
    MinorSingular {
        det: f64,
        x_prev: Vec<f64>,
        x_next: Vec<f64>,
    },

    /// Newton iteration exhausted its budget; carries the best iterate seen.
    #[error(
        "Newton iteration did not converge after {} iterations (residual {:e})",
        best.iterations,
        best.residual_norm
    )]
    NotConverged { best: SolveResult },

    #[error("singular Jacobian in Newton iteration (pivot {pivot:e})")]
    SingularJacobian { pivot: f64 },

    /// The requested stepper cannot be applied to this system.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A failure inside a time step, annotated with the step index.
    #[error("step {k}: {source}")]
    Step { k: usize, source: Box<Error> },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Where a parse error happened: a line in a named source, or a column in an expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Location {
    pub source: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "{}:{}", self.source, self.line)?;
        } else {
            write!(f, "{}", self.source)?;
        }
        if self.column > 0 {
            write!(f, " col {}", self.column)?;
        }
        Ok(())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::Input(format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}
