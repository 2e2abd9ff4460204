use thiserror::Error;

/// Errors produced by the analytic routines, the simulator and the CLI glue.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error(
        "fixed-point iteration did not converge after {iterations} iterations \
         (last iterate {last}, residual {residual:e})"
    )]
    Convergence {
        iterations: usize,
        last: f64,
        residual: f64,
    },

    #[error("transform denominator vanishes at s = {s} (value {denominator:e})")]
    Singularity { s: f64, denominator: f64 },

    #[error("non-stationary system: {0}")]
    NonStationary(String),

    #[error("numerical inversion failed: {0}")]
    Inversion(String),

    #[error("transform underflows for class {class}: beta({sigma}) = 0, repeat term is infinite")]
    Overflow { class: usize, sigma: f64 },

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error("unknown table id '{0}'")]
    UnknownTable(String),

    #[error("{0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code for the CLI: 1 usage, 2 numeric failure, 3 stationarity refusal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence { .. }
            | Error::Singularity { .. }
            | Error::Inversion(_)
            | Error::Overflow { .. }
            | Error::Degenerate(_) => 2,
            Error::NonStationary(_) => 3,
            Error::InvalidParameter(_) | Error::Domain(_) | Error::UnknownTable(_) | Error::Parse(_) | Error::Io(_) => {
                1
            }
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
