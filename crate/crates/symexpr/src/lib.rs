//! Expressions in spatial variables `x1..xn` whose atoms may depend on eps.
//!
//! Derivatives are exact and symbolic; eps-dependent atoms are constants
//! for every spatial derivative.

mod diff;
mod eval;
mod expr;
mod parse;
mod print;
pub mod quad;
pub mod template;

pub use eval::GUARD_ZERO;
pub use expr::{Expr, Guard, NamedNet, NetTable, Node};
pub use num_complex::Complex64;
pub use num_rational::Rational64;
pub use parse::{parse, parse_with_nets};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("guard violated at `{node}`")]
    Guard { node: String },
    #[error("net ${name} has no sample at eps = {eps}")]
    OffGrid { name: String, eps: f64 },
    #[error("variable x{} used with a {len}-dimensional point", index + 1)]
    Dimension { index: usize, len: usize },
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{line}:{column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}
