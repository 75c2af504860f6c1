use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid point ({x}, {y}): imaginary part must be positive and finite")]
    InvalidPoint { x: f64, y: f64 },
    #[error("numeric overflow: {0}")]
    NumericOverflow(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("resource cap exceeded: {what} (cap {cap}); {hint}")]
    Resource {
        what: String,
        cap: u64,
        hint: String,
    },
    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("net does not cover axis point ({x}, {y})")]
    CoverageGap { x: f64, y: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: &str, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            msg: msg.into(),
        }
    }
}
