use std::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dataset has no data rows")]
    EmptyDataset,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("attribute {0} is not continuous")]
    NotContinuous(usize),

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The variant produced no columns (e.g. discretized-only with nothing generated).
    #[error("variant produced no columns")]
    EmptyVariant,

    #[error("test fold is empty, accuracy undefined")]
    EmptyTestFold,

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
