//! Approximate solutions of the adjoint equation `ᵗP (psi e^{-i xi x}) ≈ phi e^{-i xi x}`
//! through the remainder operator `R(xi; x, D)`, and numerical checks of the growth
//! and decay bounds on its powers.

mod assumptions;
mod bounds;
mod fourier;
mod rational;
mod remainder;

pub use assumptions::{
    check_assumption_psi, check_assumption_r, loglog_slope, power_slope, sup_series, AdjointSampling, AssumptionKind,
    AssumptionVerdict, RadialSeries,
};
pub use bounds::check_remainder_coefficient_bounds;
pub use fourier::{decompose_fourier, FourierSplit};
pub use rational::{Base, Handle, RationalSymbol, FAMILY_A, FAMILY_DIFFERENCE, FAMILY_Q_REFLECTED};
pub use remainder::{
    apply_remainder, build_adjoint_solution, build_remainder, solution_from, verify_adjoint_identity,
    AdjointSolution, GuardRegion, RemainderOperator, MAX_ITERATIONS, NODE_BUDGET,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AdjointError {
    #[error("outside the nonvanishing region at x = {x:?}, xi = {xi:?}, eps = {eps}")]
    Guard { x: Vec<f64>, xi: Vec<f64>, eps: f64 },
    #[error(transparent)]
    Eval(#[from] symexpr::EvalError),
    #[error("expression budget exceeded: {nodes} nodes (limit {limit})")]
    Budget { nodes: usize, limit: usize },
    #[error("N = {n} outside 1..={max}")]
    Iterations { n: usize, max: usize },
    #[error("quadrature did not converge at xi = {xi}: refinement changed the result by {change:e}")]
    Quadrature { xi: f64, change: f64 },
    #[error("dimension: {0}")]
    Dimension(String),
    #[error("parameters: {0}")]
    Parameters(String),
    #[error(transparent)]
    Conditions(#[from] conditions::ConditionError),
    #[error(transparent)]
    Eps(#[from] epsnet::EpsError),
}

impl AdjointError {
    fn from_eval(e: symexpr::EvalError, x: &[f64], xi: &[f64], eps: f64) -> Self {
        match e {
            symexpr::EvalError::Guard { .. } => AdjointError::Guard { x: x.to_vec(), xi: xi.to_vec(), eps },
            other => AdjointError::Eval(other),
        }
    }
}
