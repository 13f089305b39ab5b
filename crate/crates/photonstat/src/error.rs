use std::path::PathBuf;

/// Error type shared by all photonstat modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Parameter outside its physical range (`nbar < 0`, `mu` outside `[0,1]`, ...).
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// The generating function was evaluated at or beyond its pole.
    #[error("generating-function pole: denominator {denom:.6e} <= 0 at (x={x}, y={y})")]
    PgfPole { x: f64, y: f64, denom: f64 },

    /// A normalized correlation was requested where a marginal probability vanishes.
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    /// Contour-extraction configuration violates the convergence condition.
    #[error("contour configuration: {0}")]
    ContourConfig(String),

    /// Malformed input file (PTAG or CSV), with the byte offset of the violation.
    #[error("format error in {path} at byte {offset}: {msg}")]
    Format {
        path: PathBuf,
        offset: u64,
        msg: String,
    },

    /// Time tags are not in non-decreasing timestamp order.
    #[error("unsorted time tags at record {index}")]
    UnsortedTags { index: u64 },

    /// A simulation config was routed to the wrong generator.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
