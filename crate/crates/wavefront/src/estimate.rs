use conditions::{coefficient_sup_nets, NetSummary, Sampling};
use epsnet::EpsGrid;
use serde::Serialize;
use symbols::SymbolFamily;
use symexpr::Expr;

use crate::cache::SpectrumCache;
use crate::decrease::{rapid_decrease_test, DirectionVerdict, WaveParams};
use crate::sampled::WindowSpec;
use crate::spectrum::window_spectrum;
use crate::WaveError;

pub const DIRECTIONS: [f64; 2] = [1.0, -1.0];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WfPoint {
    pub center: f64,
    pub direction: f64,
    pub regular: bool,
    pub verdict: DirectionVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WfEstimate {
    pub window_radius: f64,
    pub points: Vec<WfPoint>,
    /// singular `(center, direction)` pairs
    pub singular: Vec<(f64, f64)>,
    /// centers with at least one singular direction
    pub singular_support: Vec<f64>,
    pub params: WaveParams,
}

impl WfEstimate {
    pub fn is_empty(&self) -> bool {
        self.singular.is_empty()
    }

    /// Largest gap between neighbouring centers.
    pub fn cell(&self) -> f64 {
        let mut cs: Vec<f64> = self.points.iter().map(|p| p.center).collect();
        cs.sort_by(f64::total_cmp);
        cs.dedup();
        cs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// Windows `bump((x - c) / radius)` at every center, directions `±1`.
///
/// `cache` pairs a spectrum cache with a context string (e.g. a config hash)
/// that disambiguates families with the same printed form.
pub fn estimate_wfg(
    u: &Expr,
    centers: &[f64],
    window_radius: f64,
    grid: &EpsGrid,
    params: &WaveParams,
    cache: Option<(&SpectrumCache, &str)>,
) -> Result<WfEstimate, WaveError> {
    if u.max_var().is_some_and(|v| v > 0) {
        return Err(WaveError::Dimension(u.max_var().unwrap_or(0) + 1));
    }
    if centers.is_empty() {
        return Err(WaveError::Parameters("no window centers".into()));
    }
    let mut points = Vec::with_capacity(2 * centers.len());
    for &c in centers {
        let w = WindowSpec::bump(c, window_radius)?;
        let spec = window_spectrum(u, &w, params.points, grid.values(), cache)?;
        for v in rapid_decrease_test(&spec, &DIRECTIONS, params)? {
            points.push(WfPoint { center: c, direction: v.direction, regular: v.regular, verdict: v });
        }
    }
    let singular: Vec<(f64, f64)> = points.iter().filter(|p| !p.regular).map(|p| (p.center, p.direction)).collect();
    let mut singular_support: Vec<f64> = singular.iter().map(|s| s.0).collect();
    singular_support.dedup();
    Ok(WfEstimate { window_radius, points, singular, singular_support, params: params.clone() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MicrolocalityReport {
    pub wf_u: WfEstimate,
    pub wf_pu: WfEstimate,
    /// singular pairs of `P u` with no singular pair of `u` within one cell
    pub violations: Vec<(f64, f64)>,
    pub contained: bool,
    /// sup nets of the coefficients and their first derivatives
    pub coefficient_nets: Vec<NetSummary>,
    pub precondition_holds: bool,
    pub notes: Vec<String>,
}

/// `f_eps = P_eps u_eps` symbolically, then `WF(P u) ⊆ WF(u)` up to one cell.
pub fn microlocality_check(
    p: &SymbolFamily,
    u: &Expr,
    centers: &[f64],
    window_radius: f64,
    grid: &EpsGrid,
    params: &WaveParams,
    cache: Option<(&SpectrumCache, &str)>,
) -> Result<MicrolocalityReport, WaveError> {
    if p.dim() != 1 {
        return Err(WaveError::Dimension(p.dim()));
    }
    let lo = centers.iter().copied().fold(f64::INFINITY, f64::min) - window_radius;
    let hi = centers.iter().copied().fold(f64::NEG_INFINITY, f64::max) + window_radius;
    let coefficient_nets = coefficient_sup_nets(p, &[lo], &[hi], grid, 1, &Sampling::default())?;
    let precondition_holds = coefficient_nets.iter().all(NetSummary::is_slow_scale);
    let f = p.apply(u);
    let ctx_pu = cache.map(|c| format!("{}|P={:?}", c.1, p.coeffs().iter().map(|(a, e)| (a.0.clone(), e.to_string())).collect::<Vec<_>>()));
    let wf_u = estimate_wfg(u, centers, window_radius, grid, params, cache)?;
    let wf_pu = estimate_wfg(&f, centers, window_radius, grid, params, cache.map(|c| (c.0, ctx_pu.as_deref().unwrap_or(""))))?;
    let cell = wf_u.cell();
    let violations: Vec<(f64, f64)> = wf_pu
        .singular
        .iter()
        .filter(|(c, d)| !wf_u.singular.iter().any(|(c2, d2)| d2 == d && (c - c2).abs() <= cell * (1.0 + 1e-9)))
        .copied()
        .collect();
    let mut notes = Vec::new();
    if !precondition_holds {
        notes.push("some coefficient sup net is not slow scale; containment is not implied".into());
    }
    Ok(MicrolocalityReport { contained: violations.is_empty(), wf_u, wf_pu, violations, coefficient_nets, precondition_holds, notes })
}
