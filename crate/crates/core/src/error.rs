use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("vector at position {position} is zero")]
    ZeroVector { position: usize },

    #[error("vectors are not successive at position {position}")]
    NotSuccessive { position: usize },

    #[error("Schreier level {requested} exceeds the configured maximum {max}")]
    SchreierLimit { requested: usize, max: usize },

    #[error("set is not a member of S_{n}")]
    NotMember { n: usize },

    #[error("search budget infeasible: {0}")]
    Budget(String),

    #[error("malformed functional: {0}")]
    Malformed(String),

    #[error("codebook: {0}")]
    Codebook(String),

    #[error("tree: {0}")]
    Tree(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
