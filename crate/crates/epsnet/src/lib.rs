//! Nets `(r_eps)` sampled on a finite, strictly decreasing grid of `eps` in (0, 1].
//!
//! Every "for sufficiently small eps" statement is read as "on the
//! smallest-eps tail of the grid". Verdicts are numerical: a finite sample
//! can always disagree with the true asymptotic class of the net.

mod csvio;
mod error;
mod grid;
mod net;
mod order;
mod radius;

pub use csvio::{read_csv, write_csv};
pub use error::EpsError;
pub use grid::{EpsGrid, GridKind};
pub use net::EpsNet;
pub use order::{
    check_invertible, classify_net, estimate_order, Classification, InvertibilityVerdict,
    OrderEstimate, DEFAULT_NULL_THRESHOLD, DEFAULT_SLOW_SCALE_TOL, DEFAULT_TAIL_FRACTION,
    MACHINE_ZERO,
};
pub use radius::RadiusNet;

pub use num_complex::Complex64;
