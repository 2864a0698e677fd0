use std::path::PathBuf;

/// Errors raised while loading samples, validating questions or running a search.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed CSV content. `row` counts data rows from 1 (the header is row 0).
    #[error("row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown treatment `{0}`")]
    UnknownTreatment(String),

    #[error("malformed question: {0}")]
    MalformedQuestion(String),

    #[error("brute-force enumeration refused for n = {n} (cap is {cap})")]
    OracleCap { n: usize, cap: usize },

    #[error("count for n = {0} does not fit in 128 bits")]
    Overflow(usize),
}

impl Error {
    /// True for errors caused by bad data files or malformed questions, as
    /// opposed to bad settings.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::InvalidInput(_)
                | Error::UnknownTreatment(_)
                | Error::MalformedQuestion(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
