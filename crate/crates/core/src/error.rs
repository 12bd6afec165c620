use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("site index {site} out of range for a layout with {sites} sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid nuclear distribution: {0}")]
    InvalidDistribution(String),

    #[error("formula outside its validity domain: {0}")]
    Domain(String),

    #[error("no anti-crossing bracket found in [{lo}, {hi}] mT")]
    NoBracket { lo: f64, hi: f64 },

    #[error("time step underflow: required step {step:e} µs at t = {time} µs")]
    StepUnderflow { step: f64, time: f64 },

    #[error("transition ({initial}, {target}) has no bare nuclear counterpart")]
    IllMatchedTransition { initial: usize, target: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate regressor: {0}")]
    Degenerate(String),

    #[error("fit failed after {iterations} iterations: {reason}")]
    FitFailed {
        reason: String,
        iterations: usize,
        last: Vec<f64>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
