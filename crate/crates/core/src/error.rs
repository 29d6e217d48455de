use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("radio map has no reference points")]
    NoReferencePoints,

    #[error("k = {k} exceeds the {available} reference points in the map")]
    InsufficientReferencePoints { k: usize, available: usize },

    #[error("particle filter collapsed at step {step}: every particle crossed a wall")]
    ParticleFilterCollapse { step: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("invalid MAC address {0:?}")]
    InvalidMac(String),

    #[error("{what}: {msg}")]
    Format { what: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn format(what: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Format {
            what: what.into(),
            msg: msg.into(),
        }
    }

    /// True for malformed or inconsistent input files and arguments, as
    /// opposed to failures of an algorithm on well-formed input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NoReferencePoints
                | Error::InsufficientReferencePoints { .. }
                | Error::InvalidMac(_)
                | Error::Format { .. }
                | Error::Io(_)
                | Error::Json(_)
                | Error::Csv(_)
        )
    }
}
