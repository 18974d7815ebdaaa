use thiserror::Error;

use crate::expression::ExprError;

/// Errors from building systems and evaluating the fields derived from them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Expression(#[from] ExprError),
    #[error("unknown system `{0}`")]
    UnknownSystem(String),
    #[error("invalid system: {0}")]
    InvalidSpec(String),
    #[error("{what} is too close to zero ({value:e})")]
    Singular { what: String, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("{0}")]
    Unsupported(String),
}

impl ModelError {
    pub(crate) fn singular(what: impl Into<String>, value: f64) -> Self {
        ModelError::Singular {
            what: what.into(),
            value,
        }
    }
}
