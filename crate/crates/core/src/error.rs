use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure modes shared by every module of the crate.
///
/// The variants fall into four groups that map onto process exit codes:
/// input validation, numeric convergence, theorem violation, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("point is not interior to the domain: defining function = {value:.3e}")]
    DomainMembership { value: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("series truncated after {terms} terms: partial sum {partial_sum:.6e}, tail bound {tail_bound:.3e}")]
    Truncation {
        partial_sum: f64,
        tail_bound: f64,
        terms: u64,
    },

    #[error("fit inconsistent: {message}")]
    FitInconsistency { message: String, slope: f64, residual: f64 },

    #[error("regressor matrix is rank deficient (condition number {condition:.3e})")]
    Conditioning { condition: f64 },

    #[error("type estimates disagree: {0}")]
    Ambiguity(String),

    #[error("not a bounded ellipsoid: {0}")]
    NotBoundedEllipsoid(String),

    #[error("unsupported domain family: {0}")]
    UnsupportedFamily(String),

    #[error("theorem check violated: {0}")]
    TheoremViolation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Truncation { .. }
            | Error::FitInconsistency { .. }
            | Error::Conditioning { .. }
            | Error::Ambiguity(_) => 3,
            Error::TheoremViolation(_) => 4,
            Error::Io(_) => 1,
            _ => 2,
        }
    }
}
