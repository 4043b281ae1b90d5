use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid word {0:?}: expected letters from {{a, b, A, B}}")]
    InvalidWord(String),

    #[error("word {0} is not in F = F2' (abelianization {1:?})")]
    NotInCommutator(String, (i64, i64)),

    #[error("transversal index must be >= 1, got {0}")]
    InvalidIndex(u64),

    #[error("invalid y-word {0:?}")]
    InvalidYWord(String),

    #[error("invalid dyadic {0:?}")]
    InvalidDyadic(String),

    #[error("invalid grid point {0:?}: expected \"p,q\"")]
    InvalidGridPoint(String),

    #[error("invalid measure descriptor: {0}")]
    InvalidDescriptor(String),

    #[error("unsupported descriptor: {0}")]
    Unsupported(String),

    #[error("{0}")]
    Statistics(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
