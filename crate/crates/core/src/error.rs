use thiserror::Error;

use crate::lp::LpError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("row {row} cannot be satisfied anywhere in the box")]
    InfeasibleRow { row: usize },
    #[error("two-variable set has no solution: all coefficients vanish but the constant does not")]
    InfeasibleCurve,
    #[error("interval arithmetic overflow in row {row}")]
    Overflow { row: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("oracle refused: {0}")]
    OracleRefused(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
