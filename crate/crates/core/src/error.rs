use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// Malformed input bytes. `offset` is the byte offset of the offending byte.
    #[error("format error at byte offset {offset}: {message}")]
    Format { offset: u64, message: String },

    /// Malformed line in a line-oriented text input (1-based line number).
    #[error("parse error on line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("length error: {requested} bits requested but the input holds only {available}")]
    Length { requested: u64, available: u64 },

    #[error("index {index} out of range for a sequence of {len} bits")]
    Range { index: u64, len: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("contract violation: {0}")]
    Contract(String),

    /// Semantically invalid data, e.g. a decreasing timestamp.
    #[error("data error at index {index}: {message}")]
    Data { index: u64, message: String },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invalid generator configuration: {0}")]
    Config(String),
}
