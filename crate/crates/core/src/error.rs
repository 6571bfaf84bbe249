use thiserror::Error;

/// Errors surfaced by the kernel. Variants map onto distinct CLI exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("rationals admit no proper extension (requested degree {0})")]
    RationalExtension(usize),
    #[error("division by zero in the active field")]
    DivisionByZero,
    #[error("field extension of degree {degree} required but extensions are disabled")]
    ExtensionRequired { degree: usize },
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("germ is not an isolated complete intersection: {0}")]
    NotIcis(String),
    #[error("truncation cap {cap} exceeded: {msg}")]
    CapExceeded { cap: usize, msg: String },
    #[error("invalid contact transform: {0}")]
    InvalidTransform(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("transversal bound condition violated for weights {0}")]
    TransversalCondition(String),
    #[error("normalization unavailable: characteristic divides exponent {exponent}")]
    TrickUnavailable { exponent: i64 },
    #[error("implicit-function hypothesis fails: derivative vanishes at the center")]
    IftFails,
    #[error("reduction did not make progress: {0}")]
    Divergence(String),
    #[error("out of scope: {0}")]
    OutOfScope(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
