use std::f64::consts::PI;

use epsnet::EpsGrid;
use serde::Serialize;
use symbols::SymbolFamily;

use crate::report::Witness;
use crate::sample::Prepared;
use crate::{ConditionError, Sampling};

/// Pointwise outcome of one lower bound.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundTally {
    pub formula: String,
    pub samples: usize,
    pub violations: usize,
    /// least `|P_2| / bound`
    pub worst_ratio: f64,
    pub witness: Option<Witness>,
}

impl BoundTally {
    fn new(formula: &str) -> Self {
        BoundTally { formula: formula.into(), samples: 0, violations: 0, worst_ratio: f64::INFINITY, witness: None }
    }

    pub fn holds(&self) -> bool {
        self.samples > 0 && self.violations == 0
    }

    fn record(&mut self, lhs: f64, rhs: f64, w: impl FnOnce() -> Witness) {
        self.samples += 1;
        let q = lhs / rhs;
        if lhs < rhs * (1.0 - 1e-9) {
            self.violations += 1;
        }
        if q < self.worst_ratio {
            self.worst_ratio = q;
            self.witness = Some(w());
        }
    }
}

/// The two cone-side lower bounds for the wave principal symbol, plus the corrected second one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeBoundCheck {
    pub theta: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    /// `|tau| < (γ0 - θ)|xi|`
    pub slow_side: BoundTally,
    /// `|tau| > (γ1 + θ)|xi|`, as printed
    pub fast_side_printed: BoundTally,
    /// `|tau| > (γ1 + θ)|xi|`, with `τ²/(γ1+θ)² + ξ²`
    pub fast_side_corrected: BoundTally,
}

/// Evaluates `|P_2|` of a 2-D symbol in `(x, t)` at sampled points of the cone
/// `|tau| < (γ0-θ)|xi|` or `|tau| > (γ1+θ)|xi|` and compares with the bounds.
#[allow(clippy::too_many_arguments)]
pub fn acoustic_cone_bounds(
    p: &SymbolFamily,
    lo: &[f64],
    hi: &[f64],
    grid: &EpsGrid,
    gamma0: f64,
    gamma1: f64,
    theta: f64,
    sampling: &Sampling,
    direction_count: usize,
) -> Result<ConeBoundCheck, ConditionError> {
    if p.dim() != 2 {
        return Err(ConditionError::Parameters("the cone bounds need a symbol in (x, t)".into()));
    }
    if !(0.0 < theta && theta < gamma0 && gamma0 <= gamma1) {
        return Err(ConditionError::Parameters(format!("need 0 < theta < gamma0 <= gamma1, got {theta}, {gamma0}, {gamma1}")));
    }
    let p2 = p.principal_part();
    let prep = Prepared::new(&p2, lo, hi, grid, sampling)?;
    let (k0, k1) = (gamma0 - theta, gamma1 + theta);
    // uniform angles plus points hugging the four cone edges
    let mut angles: Vec<f64> = (0..direction_count).map(|k| 2.0 * PI * k as f64 / direction_count as f64).collect();
    for edge in [k0.atan(), k1.atan()] {
        for base in [edge, PI - edge, PI + edge, 2.0 * PI - edge] {
            angles.extend([base - 1e-6, base + 1e-6, base - 1e-3, base + 1e-3]);
        }
    }
    let mut slow = BoundTally::new("(g0^2 - (g0-theta)^2) (xi^2 + tau^2/(g0-theta)^2) / 2");
    let mut fast = BoundTally::new("((g1+theta)^2 - g1^2) (tau^2 + xi^2 (g1+theta)^2) / 2");
    let mut fixed = BoundTally::new("((g1+theta)^2 - g1^2) (tau^2/(g1+theta)^2 + xi^2) / 2");
    let eps = prep.eps();
    for e in 0..eps.len() {
        for (j, cv) in prep.vals[e].iter().enumerate() {
            for &a in &angles {
                let (c, s) = (a.cos(), a.sin());
                for &r in &prep.radii[e] {
                    let (xi, tau) = (r * c, r * s);
                    let lhs = cv.eval(&[xi, tau]).norm();
                    let w = || Witness { eps: eps[e], x: prep.xs[j].clone(), xi: vec![xi, tau], value: lhs, what: String::new() };
                    if tau.abs() < k0 * xi.abs() {
                        let rhs = (gamma0 * gamma0 - k0 * k0) * (xi * xi + tau * tau / (k0 * k0)) / 2.0;
                        slow.record(lhs, rhs, w);
                    } else if tau.abs() > k1 * xi.abs() {
                        let d = k1 * k1 - gamma1 * gamma1;
                        fast.record(lhs, d * (tau * tau + xi * xi * k1 * k1) / 2.0, w);
                        fixed.record(lhs, d * (tau * tau / (k1 * k1) + xi * xi) / 2.0, w);
                    }
                }
            }
        }
    }
    for t in [&mut slow, &mut fast, &mut fixed] {
        if let Some(w) = t.witness.as_mut() {
            w.what = format!("least |P_2| / bound for {}", t.formula);
        }
    }
    Ok(ConeBoundCheck { theta, gamma0, gamma1, slow_side: slow, fast_side_printed: fast, fast_side_corrected: fixed })
}
