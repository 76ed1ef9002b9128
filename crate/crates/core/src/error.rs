use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("generator is singular (|det| = {0:e})")]
    Singular(f64),

    #[error("no lattice point within radius {radius}")]
    BoundTooSmall { radius: f64 },

    #[error("codebook of size {size} exceeds enumeration limit {limit}; use sample_codeword")]
    EnumerationTooLarge { size: u128, limit: u128 },

    #[error("lattices are not nested: {0}")]
    NotNested(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
