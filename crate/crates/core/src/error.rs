use thiserror::Error;

/// Errors raised anywhere in the laboratory.
///
/// Variants fall into three families that the command-line tool maps onto
/// distinct exit codes: invalid input, numerical contract violations and
/// tolerances that cannot be reached.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("eigenvalue {value:e} at index {index} is below the clamping floor -{floor:e}")]
    NegativeEigenvalue { index: usize, value: f64, floor: f64 },

    #[error("exact identity failed at k = {k}, j = {j}: left {left}, right {right}")]
    IdentityMismatch {
        k: u32,
        j: u32,
        left: String,
        right: String,
    },

    #[error("no convergence after {iterations} iterations: {what}")]
    NoConvergence { what: String, iterations: u64 },

    #[error("numerical contract violated: {0}")]
    Contract(String),

    #[error("tolerance {requested:e} not achievable: {reason}")]
    ToleranceUnachievable { requested: f64, reason: String },

    #[error("requested {requested:e} but the achievable minimum is {achievable:e} (depth reached {depth})")]
    Unachievable {
        requested: f64,
        achievable: f64,
        depth: usize,
    },

    #[error("precision {given} bits is insufficient, need at least {minimum}")]
    InsufficientPrecision { given: u32, minimum: u32 },

    #[error("missing inputs: {}", .0.join(", "))]
    MissingInputs(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Contract,
    Tolerance,
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Domain(_)
            | Error::Unsupported(_)
            | Error::Invalid(_)
            | Error::MissingInputs(_)
            | Error::Json(_) => ErrorKind::Validation,
            Error::NotSymmetric { .. }
            | Error::NegativeEigenvalue { .. }
            | Error::IdentityMismatch { .. }
            | Error::NoConvergence { .. }
            | Error::Contract(_) => ErrorKind::Contract,
            Error::ToleranceUnachievable { .. }
            | Error::Unachievable { .. }
            | Error::InsufficientPrecision { .. } => ErrorKind::Tolerance,
            Error::Io(_) => ErrorKind::Io,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
