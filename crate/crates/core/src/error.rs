use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid prior constraints: {0}")]
    InvalidConstraints(String),
    #[error("invalid observation: {0}")]
    InvalidObservation(String),
    #[error("invalid reliability claim: {0}")]
    InvalidClaim(String),
    #[error("claimed bound p = {p:e} does not exceed the engineering goal epsilon = {epsilon:e}; the worst-case confidence is 0")]
    ClaimBelowGoal { p: f64, epsilon: f64 },
    #[error("no finite mileage reaches the requested confidence: {0}")]
    Unsatisfiable(String),
    #[error("no claim in (epsilon, 1) reaches confidence {c} after {n:e} miles with {k} failures")]
    NoClaimSupportable { k: u64, n: f64, c: f64 },
    #[error("closed-form mileage is not applicable: {0}")]
    ClosedFormInapplicable(String),
    #[error("root diverged: {0}")]
    Diverged(String),
    #[error("compensation is undefined: {0}")]
    CompensationUndefined(String),
    #[error("invalid prior distribution: {0}")]
    InvalidPrior(String),
    #[error("posterior normalisation underflowed to zero")]
    NormalizationFailure,
    #[error("numerical failure: {0}")]
    NumericFailure(String),
    #[error("parse error at line {line}: {message}")]
    ParseError { line: u64, message: String },
    #[error("month labels must be strictly increasing (line {line}: {label})")]
    NonMonotoneMonths { line: u64, label: String },
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{kind} fit diverged: {reason}")]
    FitDiverged { kind: String, reason: String },
    #[error("history too short: need at least {needed} inter-failure gaps, got {got}")]
    InsufficientHistory { needed: usize, got: usize },
    #[error("predictive distribution is defective (limit {limit:.4} < 0.5); no finite median")]
    NoFiniteMedian { limit: f64 },
    #[error("recalibration needs at least {needed} earlier predictions, got {got}")]
    InsufficientWarmup { needed: usize, got: usize },
    #[error("prediction records are misaligned: {0}")]
    MisalignedRecords(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        let line = e.position().map(|p| p.line()).unwrap_or(0);
        Error::ParseError {
            line,
            message: e.to_string(),
        }
    }
}
