use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EpsError {
    #[error("invalid eps grid: {0}")]
    InvalidGrid(String),
    #[error("sample {index} is not finite")]
    NonFinite { index: usize },
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("tail fraction {0} outside (0, 1]")]
    BadTailFraction(f64),
    #[error("degenerate fit: {usable} usable tail points ({zeros} zero samples excluded), need at least 5")]
    DegenerateFit { usable: usize, zeros: usize },
    #[error("net has {0} samples, need at least 8")]
    TooShort(usize),
    #[error("csv line {line}: {msg}")]
    Csv { line: usize, msg: String },
}
