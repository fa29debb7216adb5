use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of a constitutive law.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A linear solve did not reach its tolerance.
    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("time step {dt:e} exceeds the stability bound {limit:e}")]
    StepSize { dt: f64, limit: f64 },

    #[error("positivity lost: {0}")]
    Positivity(String),

    /// The coupling iteration failed; carries the relative change per iteration.
    #[error("coupling iteration did not converge in {} iterations (changes: {trace:?})", trace.len())]
    Picard { trace: Vec<f64> },

    #[error("inadmissible state: {0}")]
    State(String),

    #[error("missing data: {0}")]
    Missing(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
