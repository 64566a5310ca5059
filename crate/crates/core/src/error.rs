use std::path::PathBuf;

/// Errors produced by the botscope library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },

    #[error("invalid record: {0}")]
    Invalid(String),

    #[error("no label for user_id {0}")]
    MissingLabel(String),

    #[error("no score for user_id {0}")]
    MissingScore(String),

    #[error("duplicate user_id {0}")]
    DuplicateUser(String),

    #[error("version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: String, found: String },

    #[error("training data must contain both labels with at least {min} examples each (bots: {bots}, humans: {humans})")]
    InsufficientLabels {
        min: usize,
        bots: usize,
        humans: usize,
    },

    #[error("bot class {class} has {count} examples, need at least {min}")]
    SmallClass {
        class: String,
        count: usize,
        min: usize,
    },

    #[error("fold {fold} does not contain both labels")]
    DegenerateFold { fold: usize },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
