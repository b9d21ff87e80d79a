use thiserror::Error;

/// Errors raised anywhere in the core library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("field order {p}^{k} exceeds the supported maximum of 27")]
    OrderTooLarge { p: u32, k: u32 },
    #[error("modulus {0:?} is reducible")]
    ReducibleModulus(Vec<u32>),
    #[error("modulus must be monic of degree {expected}, got {got:?}")]
    DegreeMismatch { expected: u32, got: Vec<u32> },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("matrix is singular")]
    Singular,
    #[error("block matrix has rank {0}, expected 1")]
    RankMismatch(u8),
    #[error("operands live over different fields")]
    FieldMismatch,
    #[error("set contains a singular matrix")]
    NotInvertibleSet,
    #[error("input too small: {0}")]
    TooSmall(String),
    #[error("empty domain")]
    EmptyDomain,
    #[error("total mass is zero")]
    ZeroMass,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("decomposition stalled: extracted subset was empty at iteration {0}")]
    InternalStall(usize),
    #[error("exact spectrum requires q <= 4, got q = {0}")]
    OrderTooLargeForSpectrum(u32),
    #[error("empty vertex set")]
    EmptySet,
    #[error("the set X must be nonempty")]
    EmptyX,
    #[error("bad construction parameters: {0}")]
    BadParameters(String),
    #[error("not a subgroup of the multiplicative group: {0}")]
    NotSubgroup(String),
    #[error("requested {requested} elements from a universe of {available}")]
    SizeTooLarge { requested: usize, available: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
