use thiserror::Error;

/// Errors raised by the ranking, fitting and transfer routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-range input. `row` is the 0-based input row when known.
    #[error("input error{}: {message}", row.map(|r| format!(" at row {r}")).unwrap_or_default())]
    Input { row: Option<usize>, message: String },

    /// A metric whose denominator would be empty (no positives, no negatives, empty group).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// A lattice or enumeration that would exceed its configured budget.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Internal consistency check failed.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// Mapping file could not be parsed or violates a mapping invariant.
    #[error("mapping error: {0}")]
    Mapping(String),

    #[error("unsupported mapping version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn input(message: impl Into<String>) -> Self {
        Error::Input {
            row: None,
            message: message.into(),
        }
    }

    pub(crate) fn input_at(row: usize, message: impl Into<String>) -> Self {
        Error::Input {
            row: Some(row),
            message: message.into(),
        }
    }

    pub(crate) fn undefined(message: impl Into<String>) -> Self {
        Error::UndefinedMetric(message.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
