use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("empty question")]
    EmptyQuestion,

    #[error("empty KB")]
    EmptyKb,

    #[error("empty head")]
    EmptyHead,

    #[error("question {0} has fewer than 2 answer choices")]
    TooFewChoices(String),

    #[error("choice index {index} out of range for {len} choices")]
    ChoiceOutOfRange { index: usize, len: usize },

    #[error("malformed program: {0}")]
    Program(String),

    #[error("oracle limit: {free} free variables exceeds {limit}")]
    OracleLimit { free: usize, limit: usize },

    #[error("assignment covers {got} of {expected} variables")]
    PartialAssignment { got: usize, expected: usize },

    #[error("assignment violates constraint `{0}`")]
    InfeasibleAssignment(String),

    #[error("questions without an answer key: {}", .0.join(", "))]
    MissingAnswerKey(Vec<String>),

    #[error("no disagreements")]
    NoDisagreements,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
