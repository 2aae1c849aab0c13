use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    /// Values from different quantales were mixed in one operation.
    #[error("quantale mismatch: {0}")]
    DomainMismatch(String),
    /// A point is missing from a carrier, or two carriers that must agree differ.
    #[error("carrier mismatch: {0}")]
    CarrierMismatch(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    /// The requested operation needs to enumerate an infinite (or unguardedly large) set.
    #[error("unsupported enumeration: {0}")]
    UnsupportedEnumeration(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("unknown name: {0}")]
    Unknown(String),
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
