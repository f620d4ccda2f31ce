use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: String },

    #[error("version mismatch: file has {found:?}, expected {expected:?}")]
    VersionMismatch { found: String, expected: String },

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("malformed header: {0}")]
    Header(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("dim must be even for {kind} (got {dim})")]
    OddDim { kind: &'static str, dim: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },

    #[error("id out of range: {what} {id} (limit {limit})")]
    IdOutOfRange {
        what: &'static str,
        id: usize,
        limit: usize,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("empty vocabulary")]
    EmptyVocab,

    #[error("unknown word {0:?}")]
    UnknownWord(String),

    #[error("unknown relation label {0:?}")]
    UnknownRelation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("correlation undefined: zero variance in ranks")]
    ZeroVariance,

    #[error("not enough covered items: {covered}/{total} (need at least 2)")]
    InsufficientCoverage { covered: usize, total: usize },

    #[error("rank deficient: {0}")]
    RankDeficient(String),

    #[error("training diverged at epoch {epoch}: {msg}")]
    Diverged { epoch: usize, msg: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// True for failures caused by inputs or the environment rather than by a
    /// computation (drives the CLI exit code).
    pub fn is_usage_or_io(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Parse { .. }
                | Error::BadMagic { .. }
                | Error::VersionMismatch { .. }
                | Error::TruncatedPayload { .. }
                | Error::Header(_)
                | Error::Config(_)
                | Error::OddDim { .. }
                | Error::UnknownRelation(_)
        )
    }
}
