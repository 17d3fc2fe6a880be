//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("residue {letter:?} at position {position} is not one of the 20 canonical amino acids")]
    InvalidResidue { position: usize, letter: char },

    #[error("sequence has {len} residue(s); at least 2 are required")]
    SequenceTooShort { len: usize },

    #[error("qubit count mismatch: expected {expected}, got {got}")]
    QubitMismatch { expected: usize, got: usize },

    #[error("{needed} qubits exceed the simulation cap of {cap}; split the chain with `assemble`")]
    QubitCap { needed: usize, cap: usize },

    #[error("operator needs {needed} qubits but at most {max} are supported; split the chain with `assemble`")]
    MaskWidth { needed: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("confusion matrix is singular: p01 + p10 = {sum} must stay below 1")]
    SingularConfusion { sum: f64 },

    #[error("histogram contains no counts")]
    EmptyHistogram,

    #[error("no self-avoiding conformation among {tried} decoded bitstring(s); top candidates: {top:?}")]
    NoValidConformation { tried: usize, top: Vec<String> },

    #[error("coordinate sets differ in length: {a} vs {b}")]
    LengthMismatch { a: usize, b: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("optimization failed: {0}")]
    Optimize(String),

    #[error("assembly failed: {0}")]
    Assembly(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
