use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("input contains non-finite entries")]
    NonFinite,

    #[error("invalid input: {0}")]
    Input(String),

    #[error("secular equation has no root in ({lower}, {upper}]")]
    NoRoot { lower: f64, upper: f64 },

    #[error("combiner columns are linearly dependent")]
    DegenerateCombiner,

    #[error("no eigenvalue exceeds the noise variance")]
    ZeroSignal,

    #[error("not applicable: {0}")]
    NotApplicable(&'static str),

    #[error("search space 2^{bits} exceeds the exhaustive-search guard 2^{limit}")]
    SearchSpaceTooLarge { bits: usize, limit: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
