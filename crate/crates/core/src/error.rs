use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{}: zero valid records", path.display())]
    NoValidRecords { path: PathBuf },

    #[error("{}: zero queries", path.display())]
    NoQueries { path: PathBuf },

    #[error("{}: zero valid interaction events", path.display())]
    NoEvents { path: PathBuf },

    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("corpus is empty")]
    EmptyCorpus,

    #[error("every record tokenizes to zero tokens; nothing to index")]
    NoTokens,

    #[error("query set is empty")]
    EmptyQuerySet,

    #[error("cannot sample {requested} queries: only {available} distinct candidates")]
    VocabularyTooSmall { requested: usize, available: usize },

    #[error("cutoff {0} is not in the grid")]
    CutoffNotInGrid(usize),

    #[error("invalid cutoff grid: {0}")]
    InvalidGrid(String),

    #[error("statistics need at least one value")]
    EmptyValues,

    #[error("gini coefficient is undefined: all values are zero")]
    AllZero,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("snapshot {}: {message}", path.display())]
    Snapshot { path: PathBuf, message: String },

    #[error("snapshot {} was built with {field}={found}, expected {expected}", path.display())]
    SnapshotMismatch {
        path: PathBuf,
        field: &'static str,
        expected: String,
        found: String,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
