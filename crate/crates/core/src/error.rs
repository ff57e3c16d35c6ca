use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("a box needs at least one dimension")]
    ZeroDimension,

    #[error("elements belong to different spaces ({left} vs {right})")]
    SpaceMismatch { left: String, right: String },

    #[error("{what} must be positive, got {value}")]
    NotPositive { what: &'static str, value: String },

    #[error("negative coefficient {coef} on {cell}")]
    NegativeCoefficient { coef: String, cell: String },

    #[error("sets overlap: members {first} and {second} share {witness}")]
    Overlap {
        first: usize,
        second: usize,
        witness: String,
    },

    #[error("budget of {budget} refinements exhausted; best tail bound {achieved}")]
    BudgetExhausted { budget: usize, achieved: String },

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("unknown check `{0}`")]
    UnknownCheck(String),

    #[error("invalid space selector `{0}`")]
    InvalidSpace(String),

    #[error("invalid rational `{0}`")]
    InvalidRational(String),

    #[error("scenario error at {path}: {message}")]
    Scenario { path: String, message: String },

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
