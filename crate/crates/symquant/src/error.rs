use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown name: {0}")]
    UnknownName(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("Jacobi identity fails on basis triple ({0}, {1}, {2})")]
    JacobiViolation(String, String, String),
    #[error("sigma is not an involution")]
    NotInvolution,
    #[error("sigma is not an automorphism: bracket of ({0}, {1}) not preserved")]
    NotAutomorphism(String, String),
    #[error("not a Cartan decomposition: {0}")]
    NotCartan(String),
    #[error("invalid character: {0}")]
    InvalidCharacter(String),
    #[error("order {requested} exceeds the maximum {max}")]
    OrderTooHigh { requested: usize, max: usize },
    #[error("not k-invariant: {0}")]
    NotInvariant(String),
    #[error("not a polarization: {0}")]
    NotPolarization(String),
    #[error("polarization is not sigma-stable")]
    NotSigmaStable,
    #[error("nilradical undecidable: {0}")]
    NilradicalUndecidable(String),
    #[error("invalid Iwasawa data: {0}")]
    InvalidIwasawa(String),
    #[error("matrix does not normalize p0: {0}")]
    NotNormalizing(String),
    #[error("cap exceeded: {0}")]
    CapExceeded(String),
    #[error("coincident points")]
    CoincidentPoints,
    #[error("gauge underdetermined: configuration space has dimension {0}")]
    GaugeUnderdetermined(i64),
    #[error("color/arity mismatch: {0}")]
    ColorArityMismatch(String),
    #[error("truncation too low: {0}")]
    TruncationTooLow(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
