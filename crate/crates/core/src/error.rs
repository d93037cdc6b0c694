use thiserror::Error;

/// Errors raised by the algebra, coding and repair layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("polynomial must be monic with degree at least 1")]
    NotMonic,

    #[error("polynomial is reducible over F_{0}")]
    Reducible(u32),

    #[error("division by zero")]
    ZeroDivision,

    #[error("shape mismatch: expected {expected} coefficients, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("exponent {exponent} out of range for axis with degree {degree}")]
    ExponentOutOfRange { exponent: usize, degree: usize },

    #[error("element not supported on the index space: {0}")]
    SupportViolation(String),

    #[error("index spaces differ: {0}")]
    IndexSpaceMismatch(String),

    #[error("degree bound violated: t + deg(h) = {got} exceeds n - k - 1 = {bound}")]
    DegreeBound { got: usize, bound: usize },

    #[error("repeated evaluation point or position")]
    Repeated,

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("illegal repair configuration: {0}")]
    IllegalRepair(String),

    #[error("divisibility requirement failed: {0}")]
    Divisibility(String),

    #[error("singular trace Gram matrix at repair position {0} (construction bug)")]
    SingularGram(usize),

    #[error("malformed payload: {0}")]
    Payload(String),

    #[error("field of dimension {0} is too large to materialize")]
    TooLarge(u128),
}

pub type Result<T> = std::result::Result<T, Error>;
