use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unknown model '{0}'")]
    UnknownModel(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("grid too large: {nodes} nodes exceeds the limit of {limit}")]
    GridTooLarge { nodes: usize, limit: usize },
    #[error("time step violates the stability restriction: dt = {dt:e}, allowed = {allowed:e}")]
    StepRestriction { dt: f64, allowed: f64 },
    #[error("too many trajectories left the domain: {discarded} of {total}")]
    DomainExit { discarded: usize, total: usize },
    #[error("solver diverged: {0}")]
    Divergence(String),
    #[error("maximizer reached the edge of the search box at radius {radius}")]
    SupremumAtBoundary { radius: f64 },
    #[error("net too large: {intervals} intervals (limit {limit})")]
    NetTooLarge { intervals: usize, limit: usize },
    #[error("function is not 1-Lipschitz: slope {slope} on segment {segment}")]
    NotLipschitz { slope: f64, segment: usize },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}
