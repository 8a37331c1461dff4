use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular")]
    Singular,

    #[error("generator {index} is not primitive (content {content})")]
    NotPrimitive { index: usize, content: String },

    #[error("vector lies outside the cone")]
    NotContained,

    #[error("cannot subdivide by the zero vector")]
    Degenerate,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0} has no prime divisor")]
    NoPrimeDivisor(u64),

    #[error("prime {p} does not divide multiplicity {mu}")]
    NotDivisible { p: u64, mu: String },

    #[error("value {0} exceeds the supported machine range")]
    TooLarge(String),

    #[error("refinement needs at least {needed} cones, over the limit of {limit}")]
    Budget { needed: String, limit: usize },

    #[error("phase order violated: {0}")]
    PhaseOrder(String),

    #[error("internal contradiction: {0}")]
    Internal(String),
}
