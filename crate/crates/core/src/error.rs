use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid mask M({a},{b}) for side {n}: require 1 <= a <= b <= n")]
    InvalidMask { n: usize, a: usize, b: usize },

    #[error("invalid dice mask spec: {0}")]
    InvalidMaskSpec(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid document: {0}")]
    InvalidDocument(String),

    #[error("invalid window plan: {0}")]
    InvalidPlan(String),

    #[error("shape error at stage `{stage}`: {msg}")]
    Shape { stage: String, msg: String },

    #[error("classifier failed on window at ({x}, {y}): {msg}")]
    Classifier { x: i64, y: i64, msg: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("cannot access {}", path.display())]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
