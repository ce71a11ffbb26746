//! Generalized polynomial symbols `P_eps(x, xi) = sum a_alpha(x) xi^alpha`.

mod family;
mod json;
pub mod library;
mod multi;

pub use family::{minus_i_pow, CoefficientValues, SymbolFamily};
pub use json::{SymbolJson, SymbolTerm};
pub use multi::MultiIndex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymbolError {
    #[error("multi-index of length {got} in a {expected}-dimensional symbol")]
    Dimension { expected: usize, got: usize },
    #[error("coefficient uses x{index} but the symbol has dimension {n}")]
    Variable { index: usize, n: usize },
    #[error("coefficient {alpha:?}: {source}")]
    Parse { alpha: Vec<u32>, source: symexpr::ParseError },
    #[error("declared degree {declared}, coefficients give {actual}")]
    DegreeMismatch { declared: u32, actual: u32 },
    #[error("multi-index {0:?} listed twice")]
    DuplicateIndex(Vec<u32>),
    #[error("malformed symbol JSON: {0}")]
    Json(String),
}
