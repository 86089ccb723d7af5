use thiserror::Error;

/// Errors raised by the toolkit. Each variant maps to one failure class so
/// front ends can translate them into stable exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("not positive: smallest eigenvalue {min_eigenvalue:e} below -{tolerance:e}")]
    NotPositive { min_eigenvalue: f64, tolerance: f64 },
    #[error("not hermitian: deviation {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },
    #[error("functional is not faithful (block {block} has rank {rank} < {dim})")]
    NotFaithful {
        block: usize,
        rank: usize,
        dim: usize,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("zero functional has no support to reduce to")]
    EmptyReduction,
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),
    #[error("map is not unital: deviation {0:e}")]
    NotUnital(f64),
    #[error("not a quotient map: {0}")]
    NotQuotient(String),
    #[error("purification needs a single-block algebra, got {0} blocks")]
    NotFactor(usize),
    #[error("measure vanishes on block {0} where the functional lives")]
    SingularMeasure(usize),
    #[error("size {requested} exceeds cap {cap}")]
    TooLarge { requested: usize, cap: usize },
    #[error("invalid covariance: {0}")]
    InvalidCovariance(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable tag.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidAlgebra(_) => "InvalidAlgebra",
            Error::Shape(_) => "ShapeError",
            Error::NotPositive { .. } => "NotPositive",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotFaithful { .. } => "NotFaithful",
            Error::Domain(_) => "DomainError",
            Error::EmptyReduction => "EmptyReduction",
            Error::InvalidEmbedding(_) => "InvalidEmbedding",
            Error::NotUnital(_) => "NotUnital",
            Error::NotQuotient(_) => "NotQuotient",
            Error::NotFactor(_) => "NotFactor",
            Error::SingularMeasure(_) => "SingularMeasure",
            Error::TooLarge { .. } => "TooLarge",
            Error::InvalidCovariance(_) => "InvalidCovariance",
            Error::Parse(_) => "ParseError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
