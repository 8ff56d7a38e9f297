use thiserror::Error;

/// Errors raised by the arithmetic and reduction routines.
///
/// Every variant maps onto one of the stable process exit codes used by the
/// command-line front end, see [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("index s = {s} does not divide q_k - 1 = {q_k_minus_one}")]
    IndexHypothesisViolated { s: usize, q_k_minus_one: u64 },
    #[error("element is not invertible at the working precision")]
    NotInvertible,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("valuation of the zero element")]
    ZeroElement,
    #[error("reduced characteristic polynomial coefficient not in the base field")]
    CoefficientNotInBaseField,
    #[error("no valid extension of tau in the configured search space")]
    NoValidExtension,
    #[error("{count} valid extensions of tau found; refusing to pick one")]
    AmbiguousExtension { count: usize },
    #[error("series has infinite reduced order at the working precision")]
    InfiniteReducedOrder,
    #[error("fixed-point iteration did not stabilise after {0} rounds")]
    NoConvergence(usize),
    #[error("element is not a unit")]
    NotUnit,
    #[error("unit part of a series of reduced order {0} is not invertible, no Weierstrass factorisation")]
    NotPreparable(usize),
    #[error("matrix is singular at the working precision")]
    SingularAtPrecision,
    #[error("diagonal reduction stalled after {0} passes")]
    ReductionStalled(usize),
    #[error("reduced norm is not Galois invariant")]
    NotGaloisInvariant,
    #[error("dimension reduction met a negative π_D-exponent w = {0}")]
    WPositiveViolation(i64),
    #[error("mismatched operands: {0}")]
    Mismatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("consistency check failed: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// 2 parse, 3 precondition, 4 precision, 5 internal consistency.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::PrecisionExhausted(_) | Error::NoConvergence(_) => 4,
            Error::NotGaloisInvariant
            | Error::WPositiveViolation(_)
            | Error::CoefficientNotInBaseField
            | Error::Inconsistent(_) => 5,
            _ => 3,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
