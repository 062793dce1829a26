use std::path::PathBuf;

use thiserror::Error;

use crate::schedule::ScheduleViolation;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum PsiError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// Some arm has a zero gap, so the complexity terms are undefined.
    #[error("degenerate instance: arm {arm} has a zero gap")]
    DegenerateInstance { arm: usize },

    #[error("insufficient budget: T = {budget} is too small for K = {arms} arms ({detail})")]
    InsufficientBudget { arms: usize, budget: u64, detail: String },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(#[from] ScheduleViolation),

    #[error("not a class member: {0}")]
    NotClassMember(String),

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = PsiError> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(PsiError::InvalidArgument(msg.into()))
}
