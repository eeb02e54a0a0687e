use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("field has {got} components, expected {expected}")]
    Dimension { expected: usize, got: usize },

    #[error("boundary has {got} fields, expected one per boundary vertex ({expected})")]
    BoundaryLength { expected: usize, got: usize },

    #[error("malformed configuration: {0}")]
    MalformedConfig(String),

    #[error("configuration space of {configs} exceeds the enumeration cap of {cap}")]
    EnumerationCap { configs: u128, cap: u128 },

    #[error("division by the zero polynomial")]
    ZeroDivisor,

    #[error("cycle quotient left a nonzero remainder of degree {degree}")]
    NonzeroRemainder { degree: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
