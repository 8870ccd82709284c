use std::fmt;

use thiserror::Error;

/// A single violated invariant, addressed by the field path that broke it.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// Caller passed arguments outside an operation's domain.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("capacity exceeded: occupation {tuple:?} is above cutoff {cutoff}")]
    Capacity { tuple: Vec<u32>, cutoff: u32 },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid state: {}", join(.0))]
    Validation(Vec<Violation>),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
