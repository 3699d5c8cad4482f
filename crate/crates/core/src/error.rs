use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Input record violates a validation rule.
    #[error("{source_name}:{line}: {rule}")]
    Validation {
        source_name: String,
        line: u64,
        rule: String,
    },

    #[error("{source_name}: {message}")]
    Csv {
        source_name: String,
        message: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("adjacency graph is disconnected: component sizes {sizes:?}")]
    Disconnected { sizes: Vec<usize> },

    #[error("{index} is undefined: {reason}")]
    UndefinedIndex {
        index: &'static str,
        reason: &'static str,
    },

    #[error("zone `{zone_id}` has zero population")]
    ZeroPopulation { zone_id: String },

    #[error(
        "an origin-destination matrix is required: {operation} cannot use marginals-only flows"
    )]
    MatrixRequired { operation: &'static str },

    #[error("degenerate design: {0}")]
    Degenerate(String),

    #[error("zone sets differ across systems: first differing id `{zone_id}` ({context})")]
    ZoneSetMismatch { zone_id: String, context: String },
}

impl Error {
    pub(crate) fn validation(source_name: &str, line: u64, rule: impl Into<String>) -> Self {
        Error::Validation {
            source_name: source_name.to_string(),
            line,
            rule: rule.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by the content of input data.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::InvalidInput(_))
    }
}
