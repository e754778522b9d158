//! Error type shared by every module of the crate.

use thiserror::Error;

use crate::values::ValueKind;

/// Errors raised by builders, the closure engine and the shortcut algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alpha must be in (0, 1], got {0}")]
    InvalidAlpha(f64),

    #[error("number of hypotheses must be in 1..={max}, got {m}")]
    InvalidCount { m: usize, max: usize },

    #[error("{kind} entry {index} out of range: {value}")]
    ValueOutOfRange {
        kind: ValueKind,
        /// 1-based position of the offending entry.
        index: usize,
        value: f64,
    },

    #[error("expected {expected} values, got {found}")]
    KindMismatch { expected: ValueKind, found: ValueKind },

    #[error("invalid loss parameter: {0}")]
    InvalidLoss(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("m = {m} exceeds the enumeration cap of {cap}; use a shortcut or raise ECLOSURE_ENUM_CAP")]
    CapExceeded { m: usize, cap: usize },

    #[error("collection depends on alpha ({0}); varying alpha is not valid for it")]
    AlphaDependent(String),

    #[error("subset {subset} is not contained in [{m}]")]
    SubsetOutOfRange { subset: String, m: usize },

    #[error("operation not supported for this collection: {0}")]
    Unsupported(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Checks that `alpha` lies in (0, 1].
pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}
