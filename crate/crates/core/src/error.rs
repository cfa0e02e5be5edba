use alloc::string::String;

/// Errors produced by the computational core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("shape mismatch: {what} expected {expected}, got {actual}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("ablation mode mismatch: expected {expected}, got {actual}")]
    ModeMismatch {
        expected: &'static str,
        actual: &'static str,
    },
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("normalizer has not been fitted")]
    UnfittedNormalizer,
    #[error("need at least 2 participants for cross-validation, got {0}")]
    TooFewParticipants(usize),
    #[error("robot history missing: index {needed} precedes session start")]
    MissingHistory { needed: i64 },
    #[error("fold {fold} (held-out {participant}): {source}")]
    Fold {
        fold: usize,
        participant: String,
        source: alloc::boxed::Box<Error>,
    },
}

pub type Result<T> = core::result::Result<T, Error>;
