//! Error codes shared by every module. Variants carry a short context string;
//! the stable code prefix is what callers and the CLI match on.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("EMPTY_BODY: {0}")]
    EmptyBody(String),
    #[error("GRID_MISMATCH: {0}")]
    GridMismatch(String),
    #[error("OUT_OF_RANGE: {0}")]
    OutOfRange(String),
    #[error("BAD_NESTING: {0}")]
    BadNesting(String),
    #[error("SINGULAR_ORIGIN: {0}")]
    SingularOrigin(String),
    #[error("NON_FINITE_INTEGRAND: {0}")]
    NonFiniteIntegrand(String),
    #[error("NOT_NONNEGATIVE: {0}")]
    NotNonnegative(String),
    #[error("TOO_FEW_POINTS: {0}")]
    TooFewPoints(String),
    #[error("NOT_EVEN: {0}")]
    NotEven(String),
    #[error("INCOMPATIBLE_DATA: {0}")]
    IncompatibleData(String),
    #[error("NOT_POSITIVE: {0}")]
    NotPositive(String),
    #[error("MISSING_KINEMATICS: {0}")]
    MissingKinematics(String),
    #[error("LEVELSET_MISMATCH: {0}")]
    LevelSetMismatch(String),
    #[error("NOT_STRICTLY_LOGCONCAVE: {0}")]
    NotStrictlyLogConcave(String),
    #[error("NOT_CONCAVE: {0}")]
    NotConcave(String),
    #[error("UNSUPPORTED_BETA: {0}")]
    UnsupportedBeta(String),
    #[error("BAD_CONFIG: {0}")]
    BadConfig(String),
}

impl Error {
    /// Stable machine-readable code, the part before the colon in `Display`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyBody(_) => "EMPTY_BODY",
            Error::GridMismatch(_) => "GRID_MISMATCH",
            Error::OutOfRange(_) => "OUT_OF_RANGE",
            Error::BadNesting(_) => "BAD_NESTING",
            Error::SingularOrigin(_) => "SINGULAR_ORIGIN",
            Error::NonFiniteIntegrand(_) => "NON_FINITE_INTEGRAND",
            Error::NotNonnegative(_) => "NOT_NONNEGATIVE",
            Error::TooFewPoints(_) => "TOO_FEW_POINTS",
            Error::NotEven(_) => "NOT_EVEN",
            Error::IncompatibleData(_) => "INCOMPATIBLE_DATA",
            Error::NotPositive(_) => "NOT_POSITIVE",
            Error::MissingKinematics(_) => "MISSING_KINEMATICS",
            Error::LevelSetMismatch(_) => "LEVELSET_MISMATCH",
            Error::NotStrictlyLogConcave(_) => "NOT_STRICTLY_LOGCONCAVE",
            Error::NotConcave(_) => "NOT_CONCAVE",
            Error::UnsupportedBeta(_) => "UNSUPPORTED_BETA",
            Error::BadConfig(_) => "BAD_CONFIG",
        }
    }
}
