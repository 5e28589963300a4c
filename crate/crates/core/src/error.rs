use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("operand spaces differ: {left} vs {right}")]
    SpaceMismatch { left: String, right: String },

    #[error("mode {mode} is not defined on {space}")]
    InvalidMode { mode: String, space: String },

    #[error("index {index} out of range (max {max})")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter `{field}`: {message}")]
    InvalidParameter { field: String, message: String },

    #[error("negative collapse rate {0}")]
    NegativeRate(f64),

    #[error("operator is not hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("integration failed at t = {time}: {message}")]
    Integration { time: f64, message: String },

    #[error("drift {drift:e} exceeds contract bound {bound:e} at t = {time}")]
    Drift { time: f64, drift: f64, bound: f64 },

    #[error("steady state undefined: {0}")]
    NoUniqueSteadyState(String),

    #[error("density matrix has eigenvalue {min_eigenvalue:e} below the positivity floor")]
    NotPositive { min_eigenvalue: f64 },

    #[error("truncation inadequate at {context}: tail mass {tail_mass:e} with dim {dim}")]
    TruncationInadequate {
        context: String,
        tail_mass: f64,
        dim: usize,
    },

    #[error("unknown figure id `{0}`")]
    UnknownFigure(String),

    #[error("config error at `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(field: &str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    /// Whether the failure stems from user input rather than numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::InvalidParameter { .. }
                | Error::UnknownFigure(_)
                | Error::InvalidSpace(_)
                | Error::InvalidMode { .. }
                | Error::IndexOutOfRange { .. }
                | Error::NegativeRate(_)
        )
    }

    /// Short machine-readable category name.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpace(_) => "invalid-space",
            Error::SpaceMismatch { .. } => "space-mismatch",
            Error::InvalidMode { .. } => "invalid-mode",
            Error::IndexOutOfRange { .. } => "index-out-of-range",
            Error::InvalidState(_) => "invalid-state",
            Error::InvalidParameter { .. } => "invalid-parameter",
            Error::NegativeRate(_) => "negative-rate",
            Error::NotHermitian(_) => "not-hermitian",
            Error::Integration { .. } => "integration",
            Error::Drift { .. } => "drift",
            Error::NoUniqueSteadyState(_) => "no-unique-steady-state",
            Error::NotPositive { .. } => "not-positive",
            Error::TruncationInadequate { .. } => "truncation-inadequate",
            Error::UnknownFigure(_) => "unknown-figure",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }

    /// The offending field, when the error names one.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::Config { field, .. } | Error::InvalidParameter { field, .. } => Some(field),
            _ => None,
        }
    }
}
