use thiserror::Error;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("extension degree must be at least 1")]
    InvalidDegree,
    #[error("field order {order} exceeds the supported maximum {max}")]
    OrderTooLarge { order: u128, max: u64 },
    #[error("modulus is not a monic irreducible polynomial of the requested degree")]
    InvalidModulus,
    #[error("element encoding {enc} is out of range for a field of order {q}")]
    ElementOutOfRange { enc: u64, q: u32 },
    #[error("matrix does not have determinant 1")]
    NotUnimodular,
    #[error("inverse of zero")]
    DivisionByZero,
    #[error("element is not a square")]
    NotASquare,
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("unsupported field of order {q}: {reason}")]
    UnsupportedField { q: u32, reason: &'static str },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("work estimate {needed} exceeds the configured cap {cap}")]
    ResourceCap { needed: u128, cap: u128 },
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
