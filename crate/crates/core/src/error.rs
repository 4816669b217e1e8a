use thiserror::Error;

use crate::scalar::Rat;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("exponent {exponent} is off the lattice (1/{denom})Z ({context})")]
    Lattice {
        exponent: Rat,
        denom: u32,
        context: String,
    },

    #[error("not invertible: {0}")]
    NotInvertible(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("singular tau value at s = {s}")]
    Singular { s: Rat },

    #[error("empty validity window: {0}")]
    EmptyWindow(String),

    #[error("truncation: {0}")]
    Truncation(String),

    #[error("unsupported backend: {0}")]
    UnsupportedBackend(String),

    #[error("beta degree {degree} exceeds cap {cap}")]
    BetaDegree { degree: u32, cap: u32 },

    #[error("not a reduced operator: {0}")]
    NotReducible(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
