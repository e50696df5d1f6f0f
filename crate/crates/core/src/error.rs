use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A solution or input does not have the expected shape (length mismatch, empty tour...).
    #[error("structural error: {0}")]
    Structural(String),

    /// A packing exceeds the knapsack capacity.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("analysis error: {0}")]
    Analysis(String),

    /// Broken harness bookkeeping. Never expected in a correct program.
    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            field: field.into(),
            message: message.into(),
        }
    }
}
