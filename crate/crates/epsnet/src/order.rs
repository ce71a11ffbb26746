use serde::{Deserialize, Serialize};

use crate::grid::MIN_GRID_LEN;
use crate::{EpsError, EpsNet};

pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
pub const DEFAULT_SLOW_SCALE_TOL: f64 = 0.1;
pub const DEFAULT_NULL_THRESHOLD: f64 = 20.0;
/// Samples below this modulus count as exact zeros.
pub const MACHINE_ZERO: f64 = 1e-300;

const MIN_FIT_POINTS: usize = 5;

/// Least-squares order of a net on its smallest-eps tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    /// `+inf` when more than half of the tail is zero.
    pub kappa_hat: f64,
    /// R^2 of the log-log regression.
    pub fit_quality: f64,
    pub window: std::ops::Range<usize>,
    pub zero_count: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    Null,
    SlowScale,
    Moderate,
    ImmoderateSuspect,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum InvertibilityVerdict {
    Invertible { p_hat: f64 },
    NotInvertible {
        /// every grid point whose sample is below [`MACHINE_ZERO`]
        zero_witnesses: Vec<f64>,
        /// no zeros, but the net decays faster than any power on the tail
        null_like: bool,
    },
}

impl InvertibilityVerdict {
    pub fn is_invertible(&self) -> bool {
        matches!(self, InvertibilityVerdict::Invertible { .. })
    }
}

struct TailPoints {
    xs: Vec<f64>,
    ys: Vec<f64>,
    zeros: usize,
    window: std::ops::Range<usize>,
}

fn tail_points(net: &EpsNet, tail_fraction: f64) -> Result<TailPoints, EpsError> {
    if net.len() < MIN_GRID_LEN {
        return Err(EpsError::TooShort(net.len()));
    }
    let window = net.grid().tail(tail_fraction)?;
    let eps = net.grid().values();
    let (mut xs, mut ys, mut zeros) = (Vec::new(), Vec::new(), 0);
    for i in window.clone() {
        let m = net.samples()[i].norm();
        if m < MACHINE_ZERO {
            zeros += 1;
        } else {
            xs.push(eps[i].ln());
            ys.push(m.ln());
        }
    }
    Ok(TailPoints { xs, ys, zeros, window })
}

/// Slope and R^2; sums run in index order so results are bit-reproducible.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    // a flat net is fitted perfectly by a zero slope
    let r2 = if syy <= 1e-28 * (1.0 + my * my) * n { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    (slope, r2)
}

pub fn estimate_order(net: &EpsNet, tail_fraction: f64) -> Result<OrderEstimate, EpsError> {
    let t = tail_points(net, tail_fraction)?;
    let tail_len = t.window.len();
    if 2 * t.zeros > tail_len {
        return Ok(OrderEstimate {
            kappa_hat: f64::INFINITY,
            fit_quality: 1.0,
            window: t.window,
            zero_count: t.zeros,
        });
    }
    if t.xs.len() < MIN_FIT_POINTS {
        return Err(EpsError::DegenerateFit { usable: t.xs.len(), zeros: t.zeros });
    }
    let (slope, r2) = linear_fit(&t.xs, &t.ys);
    // snap to the exact slope when the data are an exact power law
    let kappa_hat = if (slope - slope.round()).abs() < 1e-11 { slope.round() } else { slope };
    Ok(OrderEstimate { kappa_hat, fit_quality: r2, window: t.window, zero_count: t.zeros })
}

pub fn classify_net(net: &EpsNet, slow_scale_tol: f64) -> Result<Classification, EpsError> {
    classify_with(net, slow_scale_tol, DEFAULT_TAIL_FRACTION, DEFAULT_NULL_THRESHOLD)
}

pub(crate) fn classify_with(
    net: &EpsNet,
    slow_scale_tol: f64,
    tail_fraction: f64,
    null_threshold: f64,
) -> Result<Classification, EpsError> {
    let est = estimate_order(net, tail_fraction)?;
    if est.kappa_hat == f64::INFINITY {
        return Ok(Classification::Null);
    }
    let t = tail_points(net, tail_fraction)?;
    if est.kappa_hat > null_threshold && monotone_decay(&t.ys) {
        return Ok(Classification::Null);
    }
    if est.kappa_hat >= -slow_scale_tol {
        return Ok(Classification::SlowScale);
    }
    if est.fit_quality < 0.5 && steepening_growth(&t.xs, &t.ys) {
        return Ok(Classification::ImmoderateSuspect);
    }
    Ok(Classification::Moderate)
}

/// Samples are ordered towards smaller eps; decay means non-increasing |r|.
fn monotone_decay(ys: &[f64]) -> bool {
    ys.windows(2).all(|w| w[1] <= w[0])
}

/// Growth whose local log-log slope keeps getting steeper towards eps -> 0.
fn steepening_growth(xs: &[f64], ys: &[f64]) -> bool {
    let slopes: Vec<f64> = (1..xs.len()).map(|i| (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1])).collect();
    slopes.len() >= 2
        && slopes.iter().all(|&s| s < 0.0)
        && slopes.windows(2).all(|w| w[1] <= w[0])
        && slopes.last() < slopes.first()
}

pub fn check_invertible(net: &EpsNet) -> InvertibilityVerdict {
    let eps = net.grid().values();
    let zero_witnesses: Vec<f64> = net
        .samples()
        .iter()
        .zip(eps)
        .filter(|(z, _)| z.norm() < MACHINE_ZERO)
        .map(|(_, &e)| e)
        .collect();
    let window = match net.grid().tail(DEFAULT_TAIL_FRACTION) {
        Ok(w) => w,
        Err(_) => 0..net.len(),
    };
    let tail_zero = window.clone().any(|i| net.samples()[i].norm() < MACHINE_ZERO);
    if tail_zero {
        return InvertibilityVerdict::NotInvertible { zero_witnesses, null_like: false };
    }
    if let Ok(Classification::Null) =
        classify_with(net, DEFAULT_SLOW_SCALE_TOL, DEFAULT_TAIL_FRACTION, DEFAULT_NULL_THRESHOLD)
    {
        return InvertibilityVerdict::NotInvertible { zero_witnesses, null_like: true };
    }
    // smallest integer m with |r| >= eps^m on the tail, i.e. m >= ln|r| / ln eps
    let worst = window
        .map(|i| net.samples()[i].norm().ln() / eps[i].ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let p_hat = (worst - 1e-9).ceil();
    InvertibilityVerdict::Invertible { p_hat: if p_hat == 0.0 { 0.0 } else { p_hat } }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::EpsGrid;
    use num_complex::Complex64;

    fn dy() -> EpsGrid {
        EpsGrid::default_dyadic()
    }

    #[test]
    fn exact_powers() {
        let e = estimate_order(&EpsNet::from_real(&dy(), |e| e * e).unwrap(), 0.5).unwrap();
        assert_eq!(e.kappa_hat, 2.0);
        assert_eq!(e.fit_quality, 1.0);
        let e = estimate_order(&EpsNet::from_real(&dy(), |e| e.powf(-0.5)).unwrap(), 0.5).unwrap();
        assert!((e.kappa_hat + 0.5).abs() < 1e-12);
    }

    #[test]
    fn log_net_matches_midpoint_slope() {
        let g = dy();
        let net = EpsNet::from_real(&g, |e| (1.0 / e).ln()).unwrap();
        let est = estimate_order(&net, 0.5).unwrap();
        // d ln ln(1/eps) / d ln eps = -1/ln(1/eps), taken at the log-midpoint of the tail
        let w = &g.values()[est.window.clone()];
        let mid = (w[0].ln() + w[w.len() - 1].ln()) / 2.0;
        let oracle = 1.0 / mid;
        assert!((est.kappa_hat - oracle).abs() < 0.01, "{} vs {}", est.kappa_hat, oracle);
        assert_eq!(classify_net(&net, 0.1).unwrap(), Classification::SlowScale);
    }

    #[test]
    fn zeros_are_counted() {
        let g = dy();
        let net = EpsNet::from_real(&g, |e| if e < 1e-9 { 0.0 } else { e }).unwrap();
        let est = estimate_order(&net, 0.5).unwrap();
        assert_eq!(est.kappa_hat, f64::INFINITY);
        assert_eq!(classify_net(&net, 0.1).unwrap(), Classification::Null);

        // 5 of 20 tail points zero: fit on the remaining 15
        let net = EpsNet::from_real(&g, |e| if e < 2f64.powi(-35) { 0.0 } else { e }).unwrap();
        let est = estimate_order(&net, 0.5).unwrap();
        assert_eq!(est.zero_count, 5);
        assert_eq!(est.kappa_hat, 1.0);

        let g8 = EpsGrid::dyadic(1, 10).unwrap();
        let net = EpsNet::from_real(&g8, |e| if e < 2f64.powi(-8) { 0.0 } else { 1.0 }).unwrap();
        match estimate_order(&net, 0.5) {
            Err(EpsError::DegenerateFit { usable: 3, zeros: 2 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classification_examples() {
        let g = dy();
        let c = EpsNet::from_real(&g, |_| 3.0).unwrap();
        assert_eq!(classify_net(&c, 0.1).unwrap(), Classification::SlowScale);
        let r = EpsNet::from_real(&g, |e| e.powf(-0.5)).unwrap();
        assert_eq!(classify_net(&r, 0.1).unwrap(), Classification::Moderate);
        let fast = EpsNet::from_real(&g, |e| e.powi(30)).unwrap();
        assert_eq!(classify_net(&fast, 0.1).unwrap(), Classification::Null);
    }

    #[test]
    fn invertibility_examples() {
        let g = dy();
        let v = check_invertible(&EpsNet::from_real(&g, |e| e.powi(3)).unwrap());
        assert_eq!(v, InvertibilityVerdict::Invertible { p_hat: 3.0 });
        let v = check_invertible(&EpsNet::from_real(&g, |_| 2.0).unwrap());
        assert_eq!(v, InvertibilityVerdict::Invertible { p_hat: 0.0 });

        let g = EpsGrid::reciprocal_midpoints(12).unwrap();
        let c = EpsNet::from_fn(&g, |e| {
            if EpsGrid::is_resonant(e) { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, 1.0) }
        })
        .unwrap();
        match check_invertible(&c) {
            InvertibilityVerdict::NotInvertible { zero_witnesses, .. } => {
                let want: Vec<f64> = (1..=12).map(|k| 1.0 / k as f64).collect();
                assert_eq!(zero_witnesses, want);
            }
            v => panic!("{v:?}"),
        }
    }
}
