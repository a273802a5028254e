use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid normed space: {0}")]
    InvalidSpace(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("atom index {index} out of range for {atoms} atoms")]
    IndexOutOfRange { index: usize, atoms: usize },

    #[error("size limit exceeded: {what} supports at most {cap} ({detail}), got {got}")]
    SizeLimit {
        what: &'static str,
        cap: usize,
        detail: &'static str,
        got: usize,
    },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("insufficient paths: need at least {need}, got {got}")]
    InsufficientPaths { need: usize, got: usize },

    #[error("measure and ensemble are defined on different partitions")]
    PartitionMismatch,

    #[error("direction {direction} requires {requirement}, got norm {norm}")]
    DirectionMismatch {
        direction: &'static str,
        requirement: &'static str,
        norm: String,
    },

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("unknown suite `{0}`")]
    UnknownSuite(String),

    #[error("invalid ensemble dump: {0}")]
    Dump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
