use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),

    #[error("modulus {0} is not prime")]
    ModulusNotPrime(u64),

    #[error("modulus {0} is not the square of an odd prime")]
    ModulusNotSquareOfPrime(u64),

    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: u64, modulus: u64 },

    #[error("B_{index} has p = {p} in its denominator")]
    PoleAtIndex { index: u64, p: u64 },

    #[error("{what} = {value} exceeds the configured bound {bound}")]
    BoundExceeded {
        what: &'static str,
        value: u64,
        bound: u64,
    },

    #[error("({p}, {r}) is not an irregular pair")]
    NotIrregular { p: u64, r: u64 },

    #[error("integrality check failed for ({p}, {r}): {detail}")]
    IntegralityFailure { p: u64, r: u64, detail: String },

    #[error("relation system for ({p}, {r}) has only the zero solution")]
    TriviallyZero { p: u64, r: u64 },

    #[error("inputs belong to different pairs: expected ({p}, {r}), got ({other_p}, {other_r})")]
    PairMismatch {
        p: u64,
        r: u64,
        other_p: u64,
        other_r: u64,
    },

    #[error("no lambda value for weight {0}")]
    MissingLambda(u32),

    #[error("expected exactly the (3,9) and (5,7) commutator coefficients")]
    WrongShape,

    #[error("commutator coefficient for {0:?} vanishes")]
    ZeroCoefficient((u32, u32)),

    #[error("{0}")]
    Domain(String),

    #[error("cache {path}, line {line}: {detail}")]
    Cache {
        path: String,
        line: usize,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
