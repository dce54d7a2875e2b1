use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("generating class is not downward-closed: {set:?} is present but its subset {missing:?} is not")]
    NotDownwardClosed { set: Vec<usize>, missing: Vec<usize> },

    #[error("model too large for exact evaluation: {cells} cells exceeds the budget of {budget}")]
    TooLarge { cells: String, budget: usize },

    #[error("zero probability at cell {cell:?}")]
    ZeroProbability { cell: Vec<usize> },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    #[error("unknown vertex {0}")]
    UnknownVertex(usize),

    #[error("buffer set has {size} vertices, above the cap of {cap}")]
    BufferTooLarge { size: usize, cap: usize },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("face certificate violated: {0}")]
    Certificate(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
