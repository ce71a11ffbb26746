//! Numerical generalized wavefront sets of one-dimensional eps-families.
//!
//! A pair `(x0, ω)` is regular when the windowed transform `(φ u_eps)^` decays
//! rapidly along `ω`, uniformly in a fixed power of `1/eps`. On a finite
//! frequency band this is tested per eps by the radial decay rate and across
//! eps by fitted prefactor orders.

mod cache;
mod decrease;
mod derivs;
mod estimate;
mod sampled;
mod spectrum;

pub use cache::SpectrumCache;
pub use decrease::{decay_curves_csv, rapid_decrease_test, DirectionVerdict, WaveParams};
pub use derivs::{slow_scale_derivative_check, DerivativeOptions, DerivativeReport};
pub use estimate::{estimate_wfg, microlocality_check, MicrolocalityReport, WfEstimate, WfPoint};
pub use sampled::{SampledNetFunction, WindowSpec};
pub use spectrum::{windowed_fft, Spectrum};

#[derive(Debug, thiserror::Error)]
pub enum WaveError {
    #[error(transparent)]
    Eval(#[from] symexpr::EvalError),
    #[error(transparent)]
    Eps(#[from] epsnet::EpsError),
    #[error("band up to {requested} exceeds a quarter of the Nyquist frequency {nyquist}")]
    Nyquist { requested: f64, nyquist: f64 },
    #[error("window: {0}")]
    Window(String),
    #[error("non-finite sample of u at x = {x}, eps = {eps}")]
    NonFinite { x: f64, eps: f64 },
    #[error("only one-dimensional families are supported, got n = {0}")]
    Dimension(usize),
    #[error("parameters: {0}")]
    Parameters(String),
    #[error(transparent)]
    Conditions(#[from] conditions::ConditionError),
    #[error("cache: {0}")]
    Cache(#[from] std::io::Error),
}
