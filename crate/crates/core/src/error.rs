use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid dimensions must be positive, got {width}x{height}")]
    InvalidGeometry { width: usize, height: usize },

    #[error("{what}: expected length {expected}, got {actual}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("geometry mismatch: {left} vs {right}")]
    GeometryMismatch { left: String, right: String },

    #[error("invalid neighbor pair ({p}, {q}): {reason}")]
    InvalidPair { p: usize, q: usize, reason: &'static str },

    #[error("duplicate neighbor pair ({p}, {q})")]
    DuplicatePair { p: usize, q: usize },

    #[error("non-finite weight in {0}")]
    NonFinite(String),

    #[error("instance has {nodes} nodes, exhaustive search is limited to {limit}")]
    TooLarge { nodes: usize, limit: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("malformed partition: {0}")]
    MalformedPartition(String),

    #[error("superpixel target count {target} exceeds pixel count {pixels}")]
    TargetCountTooLarge { target: usize, pixels: usize },

    #[error("edge ({k}, {l}) violates regularity: w00+w11 exceeds w01+w10 by {excess:e}")]
    NonSubmodular { k: usize, l: usize, excess: f64 },

    #[error("seed set is empty: {0}")]
    EmptySeeds(&'static str),

    #[error("seed conflict: {0}")]
    SeedConflict(String),

    #[error("{0} has an empty boundary")]
    EmptyBoundary(&'static str),

    #[error("no misclassified pixels left")]
    Converged,

    #[error("image: {0}")]
    Image(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<image::ImageError> for Error {
    fn from(err: image::ImageError) -> Self {
        Error::Image(err.to_string())
    }
}
