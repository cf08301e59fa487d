use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("singular point: {0}")]
    SingularPoint(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("method {method} does not apply to n = {n}")]
    MethodMismatch { method: String, n: usize },

    #[error("quadrature did not converge: best estimate {best:e}, error estimate {error:e}")]
    Quadrature { best: f64, error: f64 },

    #[error("extrapolation diverged: {0}")]
    Extrapolation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
