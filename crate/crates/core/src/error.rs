use thiserror::Error;

use crate::model::ValidationErrors;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    Validation(ValidationErrors),

    #[error("invalid argument `{name}`: {message}")]
    InvalidArgument { name: &'static str, message: String },

    #[error("reward model `{kind}` is not supported here; supported: {supported}")]
    UnsupportedReward {
        kind: &'static str,
        supported: &'static str,
    },

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("policy is not monotone in the reward ({0} violations)")]
    NonMonotonePolicy(usize),

    #[error("grid/scenario mismatch: {0}")]
    Mismatch(String),

    #[error("condition `{condition}`: {source}")]
    Condition {
        condition: &'static str,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn arg(name: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            message: message.into(),
        }
    }
}
