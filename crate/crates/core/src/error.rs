use thiserror::Error;

/// Errors raised by the estimation engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("observation {0} lies outside the support")]
    OutOfSupport(f64),

    #[error("level 0 cells have no parent")]
    NoParent,

    #[error("cell index {cell} out of range at level {level}")]
    CellOutOfRange { level: usize, cell: usize },

    #[error("level {level} out of range (family has {levels} levels)")]
    LevelOutOfRange { level: usize, levels: usize },

    #[error("reference measure assigns zero mass to cell {cell} at level {level}")]
    ZeroMassCell { level: usize, cell: String },

    #[error("invalid reference measure: {0}")]
    InvalidMeasure(String),

    #[error("point {x} is not in cell {cell}")]
    NotInCell { x: f64, cell: String },

    #[error("symbol out of range: {symbol} (alphabet size is {alphabet_size})")]
    SymbolOutOfRange { symbol: usize, alphabet_size: usize },

    #[error("invalid coder: {0}")]
    InvalidCoder(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("function value {value} at x = {x} exceeds bound {bound}")]
    BoundViolation { x: f64, value: f64, bound: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(vec![msg.into()])
    }
}

pub type Result<T> = std::result::Result<T, Error>;
