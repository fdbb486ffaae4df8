use thiserror::Error;

/// Errors raised by the verification engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A graph specification broke one of its named invariants.
    #[error("invalid spec: invariant `{invariant}` violated: {detail}")]
    InvalidSpec {
        invariant: &'static str,
        detail: String,
    },

    #[error("grids do not share a common root square and resolution")]
    GeometryMismatch,

    /// An interval below the grid resolution was asked for an average.
    #[error("interval of scale {scale} is finer than the grid cell scale {cell_scale}")]
    TooFine { scale: i32, cell_scale: i32 },

    #[error("function `{0}` is not bound")]
    UnboundFunction(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("zero norm for function `{0}`")]
    ZeroNorm(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
