//! Numerical checkers for lower bounds and derivative-ratio bounds of
//! generalized symbols, and a conic scanner for the directions where they hold.
//!
//! All verdicts are numerical: they come from a sampled eps tail, a grid of
//! base points in one box, finitely many directions and log-spaced radii.

mod acoustic;
mod first_order;
mod mh;
mod principal;
mod region;
mod report;
mod sample;
mod scan;

pub use acoustic::{acoustic_cone_bounds, BoundTally, ConeBoundCheck};
pub use first_order::{check_first_order, coefficient_sup_nets};
pub use mh::{check_mh1, check_mh2, check_wh_elliptic, default_direction_count};
pub use principal::{check_principal, cross_check_st_implies_mh, CrossCheck};
pub use region::{fibonacci, sphere, ConicRegion, DirectionSet, Sampling};
pub use report::{ConditionId, ConditionReport, NetSummary, Witness};
pub use scan::{scan_mg, CellResult, ConeScanResult, ScanMode, ScanOptions, WedgeVerdict};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConditionError {
    #[error("region: {0}")]
    Region(String),
    #[error("parameters: {0}")]
    Parameters(String),
    #[error("expected a symbol of degree {expected}, got {got}")]
    Degree { expected: u32, got: u32 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Eval(#[from] symexpr::EvalError),
    #[error(transparent)]
    Eps(#[from] epsnet::EpsError),
}
