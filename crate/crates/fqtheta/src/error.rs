use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field size {0}: must be an odd prime power <= {1}")]
    BadFieldSize(u64, u64),
    #[error("unsupported space: {0}")]
    BadSpace(String),
    #[error("no rational orbit: {0}")]
    NoRationalOrbit(String),
    #[error("projected group order {projected} exceeds bound {bound} ({what})")]
    OrderBound {
        what: String,
        projected: u64,
        bound: u64,
    },
    #[error("carrier dimension {needed} exceeds bound {bound}")]
    CarrierBound { needed: u64, bound: u64 },
    #[error("numeric integrity violation: {0}")]
    NumericIntegrity(String),
    #[error("validation gate failure: {0}")]
    ValidationGate(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("cache error: {0}")]
    Cache(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad configuration: {0}")]
    Config(String),
}
