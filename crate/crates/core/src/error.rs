use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("curves are defined on different grids")]
    GridMismatch,

    #[error("y-grid does not cover the range of the curve values")]
    RangeNotCovered,

    #[error("y = {y} is a critical value (|dQ/du| < {tol} at some root)")]
    CriticalValue { y: f64, tol: f64 },

    #[error("weak instrument: first-stage difference {0} is too small")]
    WeakInstrument(f64),

    #[error("singular design: {0}")]
    SingularDesign(String),

    #[error("grid-search argmin hit the boundary of the effect grid; widen the grid")]
    GridBoundary,

    #[error("too few bootstrap replicates ({b}) for level {level}")]
    InsufficientReplicates { b: usize, level: f64 },

    #[error("{failed} of {total} bootstrap replicates failed (more than 5%)")]
    TooManyFailedReplicates { failed: usize, total: usize },

    #[error("monotone intersection of the band is empty")]
    InfeasibleBand,

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
