use std::path::PathBuf;

use crate::robot_model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("failed to ingest {}: {reason}", file.display())]
    Ingest { file: PathBuf, reason: String },

    #[error("parse error at row {row}: {reason}")]
    Parse { row: usize, reason: String },

    #[error("illegal transition: event `{event}` is not allowed in mode `{mode}`")]
    Transition { mode: String, event: String },

    #[error("no safe transition: direct plan has {} violation(s), via-neutral plan has {} violation(s)", direct.violations.len(), via_neutral.violations.len())]
    Planning {
        direct: Box<ValidationReport>,
        via_neutral: Box<ValidationReport>,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}
