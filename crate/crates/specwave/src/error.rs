use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error: {0}")]
    Syntax(String),

    #[error("{}{message}", if path.is_empty() { String::new() } else { format!("{path}: ") })]
    Schema { path: String, message: String },

    #[error("invalid override: {0}")]
    Override(String),

    #[error("config declares kind `{declared}` but `{requested}` was requested")]
    KindMismatch { declared: String, requested: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Solver(#[from] specwave_core::Error),
}
