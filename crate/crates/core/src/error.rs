use std::path::PathBuf;

use thiserror::Error;

/// Errors reported by the numerical routines and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("gamma pole at x = {0}")]
    Pole(f64),

    #[error("gamma overflow at x = {0} (limit {limit})", limit = crate::specfun::GAMMA_OVERFLOW_LIMIT)]
    Overflow(f64),

    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("weight is singular at tau = {tau} (exponent {exponent})")]
    SingularEndpoint { tau: f64, exponent: f64 },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("window [{start}, {end}] lies outside the signal support [{support_start}, {support_end}]")]
    WindowOutOfRange {
        start: f64,
        end: f64,
        support_start: f64,
        support_end: f64,
    },

    #[error("{what} = {value} is not aligned to the sampling grid (dt = {dt})")]
    GridMisalignment { what: &'static str, value: f64, dt: f64 },

    #[error("signal has {len} samples, window needs {needed}")]
    SignalTooShort { len: usize, needed: usize },

    #[error("alpha - n = {gap} is below {min} for the affine estimator")]
    NearIntegerOrder { gap: f64, min: f64 },

    #[error("oracle did not converge: h/2 discrepancy {discrepancy:e} exceeds {tolerance:e}")]
    NonConvergence { discrepancy: f64, tolerance: f64 },

    #[error("signal energy is zero")]
    DegenerateSignal,

    #[error("unknown signal expression `{0}`")]
    UnknownExpression(String),

    #[error("invalid parameter {field}: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("{path}: row {row}: {reason}")]
    MalformedCsv {
        path: PathBuf,
        row: usize,
        reason: String,
    },

    #[error("{path}: no data rows")]
    EmptySignal { path: PathBuf },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics themselves (as opposed to bad input or
    /// configuration): oracle non-convergence, guard trips, gamma poles/overflow.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Pole(_) | Error::Overflow(_) | Error::NonConvergence { .. } | Error::NearIntegerOrder { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
