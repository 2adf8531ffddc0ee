use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolarError {
    #[error("block length must be a power of two >= 4, got {0}")]
    BlockLength(usize),
    #[error("information length {k} out of range for block length {n}")]
    InfoLength { k: usize, n: usize },
    #[error("invalid frozen set: {0}")]
    FrozenSet(String),
    #[error("unsupported CRC configuration: {0}")]
    Crc(String),
    #[error("unknown construction method `{0}`")]
    UnknownMethod(String),
    #[error("invalid design parameter {0}")]
    DesignParam(f64),
    #[error("input has {got} entries, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("frozen position {0} carries a nonzero bit")]
    NonzeroFrozen(usize),
    #[error("list size {0} is not supported here (must be a power of two)")]
    ListSize(usize),
    #[error("invalid tree threshold: {0}")]
    Threshold(String),
    #[error("unknown decoding algorithm `{0}`")]
    UnknownAlgorithm(String),
    #[error("SNR grid is empty")]
    EmptySnrGrid,
    #[error("architecture parameters out of range: {0}")]
    Arch(String),
    #[error("malformed code file: {0}")]
    Parse(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for PolarError {
    fn from(e: std::io::Error) -> Self {
        PolarError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PolarError>;
