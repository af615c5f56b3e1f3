use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("expected a unit vector, norm is {0}")]
    NotUnit(f64),

    #[error("invalid line parameters r={r}, theta={theta}")]
    InvalidLine { r: f64, theta: f64 },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configurations live in different spaces ({left} vs {right})")]
    SpaceMismatch {
        left: &'static str,
        right: &'static str,
    },

    #[error(
        "quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e}"
    )]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
