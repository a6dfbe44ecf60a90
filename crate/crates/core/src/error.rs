use thiserror::Error;

/// Errors raised by the pure scoring and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("link matrix must have at least one code and one test (got {n_codes}x{n_tests})")]
    EmptyMatrix { n_codes: usize, n_tests: usize },
    #[error("link data has {found} entries, expected {expected}")]
    LinkCount { expected: usize, found: usize },
    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("{what} dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("need at least {needed} candidates, found {found}")]
    InsufficientCandidates { needed: usize, found: usize },
    #[error("vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} observations, found {found}")]
    TooFewObservations { needed: usize, found: usize },
    #[error("correlation is undefined for a constant vector")]
    UndefinedCorrelation,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("statistics undefined: {0}")]
    UndefinedStatistics(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
