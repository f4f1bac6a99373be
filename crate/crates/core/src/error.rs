use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("subject id must be non-empty")]
    EmptySubjectId,

    #[error("unknown subject `{0}`")]
    UnknownSubject(String),

    #[error("duplicate subject `{0}`")]
    DuplicateSubject(String),

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("missing relevance for subject `{0}`")]
    MissingRelevance(String),

    #[error("invalid attention model: {0}")]
    InvalidAttentionModel(String),

    #[error("invalid ranking request: {0}")]
    InvalidRequest(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("relevance lists are not the same multiset of scores")]
    MultisetMismatch,

    #[error("brute force is limited to n <= {max}, got n = {n}")]
    ProblemTooLarge { n: usize, max: usize },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("no usable rows for `{0}`")]
    EmptyDataset(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
