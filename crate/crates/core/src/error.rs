use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("user id {id} out of range for {n_users} users")]
    IdOutOfRange { id: usize, n_users: usize },

    #[error("self-loop ({0}, {0}) is not allowed in the follower graph")]
    SelfLoop(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: graph has {graph} users, rates cover {rates}")]
    DimensionMismatch { graph: usize, rates: usize },

    #[error("user {0} has zero activity (lambda + mu must be positive)")]
    InactiveUser(usize),

    #[error("iteration did not converge after {iterations} steps (last step residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("I - A is singular; the propagation matrix has spectral radius 1 (no user in some leader cycle injects self-posts)")]
    Singular,

    #[error("dense solve refused: {n} users exceeds the cap of {cap}")]
    TooLargeForDense { n: usize, cap: usize },

    #[error("score for user {0} is NaN")]
    NanScore(usize),

    #[error("label {0} missing from a full normalization request")]
    MissingLabel(usize),

    #[error("depth {depth} exceeds ranking length {n}")]
    DepthTooLarge { depth: usize, n: usize },

    #[error("rankings cover different user sets")]
    UserSetMismatch,

    #[error("repost chain starting at post {start} contains a cycle through post {at}")]
    RepostCycle { start: u64, at: u64 },

    #[error("repost refers to unknown post {0}")]
    UnknownPost(u64),

    #[error("events are not sorted by (timestamp, post_id) at index {0}")]
    UnsortedTrace(usize),

    #[error("empty time window [{start}, {end}]")]
    EmptyWindow { start: f64, end: f64 },

    #[error("{count} malformed lines exceed the error budget of {budget}; first: {first}")]
    TooManyMalformed {
        count: usize,
        budget: usize,
        first: String,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
