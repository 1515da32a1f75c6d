use thiserror::Error;

/// Errors raised while building or applying the fast summation operator.
#[derive(Debug, Error)]
pub enum FmmError {
    #[error("points {first} and {second} have identical coordinates")]
    DuplicatePoint { first: usize, second: usize },

    #[error("coincident coordinates passed to kernel evaluation")]
    CoincidentPoints,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("point {index} is not finite")]
    NonFinitePoint { index: usize },

    #[error("point lies outside the root box")]
    PointOutsideRoot,

    #[error("tree depth would exceed the maximum of {max} levels")]
    DepthExceeded { max: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("reference vector is identically zero, relative error undefined")]
    ZeroReference,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<FmmError>,
    },
}

impl FmmError {
    /// Attach the name of the pipeline stage that failed.
    pub fn at_stage(self, stage: &'static str) -> Self {
        FmmError::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, FmmError>;
