use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("config syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid device: {0}")]
    InvalidDevice(String),
    #[error("cannot compose an empty list of matrices")]
    EmptyProduct,
    #[error("exterior velocity must be positive (got {0})")]
    NonPropagating(f64),
    #[error("M11 vanished; transmission undefined")]
    ZeroM11,
    #[error("matrix sits on a band edge (g u' = {gu}, -u g' = {ug}); zone is not classified")]
    Unclassified { gu: f64, ug: f64 },
    #[error("operation needs {expected} zone, got {found}")]
    WrongZone {
        expected: &'static str,
        found: String,
    },
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("interval [{lo}, {hi}] crosses a band edge")]
    StraddlesEdge { lo: f64, hi: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
