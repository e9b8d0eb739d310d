use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A caller-supplied value is out of range or malformed.
    #[error("invalid input: {0}")]
    Input(String),

    /// Parameters violate a structural constraint (divisibility, ordering, ...).
    #[error("invalid parameters: {0}")]
    Params(String),

    /// Graph or code construction could not proceed.
    #[error("construction failed: {0}")]
    Construction(String),

    /// A closed-form bound is evaluated outside the region where it holds.
    #[error("outside the domain of the bound: {0}")]
    Domain(String),

    /// No parameter value satisfies the requested probability target.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The secure phase needs |V^gr_j| <= R n_j for every layer.
    #[error("unsupported regime: {0}")]
    Unsupported(String),

    /// Text or binary artifact could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! input_err {
    ($($arg:tt)*) => { $crate::error::Error::Input(format!($($arg)*)) };
}
pub(crate) use input_err;
