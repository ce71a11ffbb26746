use epsnet::{classify_net, estimate_order, Classification, EpsGrid, EpsNet, GridKind, RadiusNet};
use serde::Serialize;

use crate::spectrum::Spectrum;
use crate::WaveError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaveParams {
    /// grid points per window box
    pub points: usize,
    /// `∀ l` is truncated to `l <= l_max`
    pub l_max: u32,
    /// uniform cap on the fitted prefactor orders
    pub n_max: f64,
    /// spectrum values below `floor_rel` times the largest `Spectrum::scale`
    /// over the grid count as zero
    pub floor_rel: f64,
    pub tail: f64,
    pub slow_scale_tol: f64,
    /// frequencies `|xi| < r_eps` are excluded per eps
    pub radius_net: RadiusNet,
    /// defaults to the outer half of `[0, nyquist / 4]`
    pub band: Option<(f64, f64)>,
}

impl Default for WaveParams {
    fn default() -> Self {
        WaveParams {
            points: 4096,
            l_max: 8,
            n_max: 10.0,
            floor_rel: 1e-10,
            tail: 0.5,
            slow_scale_tol: 0.1,
            radius_net: RadiusNet::default(),
            band: None,
        }
    }
}

impl WaveParams {
    pub fn band_for(&self, spec: &Spectrum) -> Result<(f64, f64), WaveError> {
        let top = spec.nyquist / 4.0;
        let Some((lo, hi)) = self.band else {
            return Ok((top / 2.0, top));
        };
        if hi > top * (1.0 + 1e-12) {
            return Err(WaveError::Nyquist { requested: hi, nyquist: spec.nyquist });
        }
        if !(0.0 <= lo && lo < hi) {
            return Err(WaveError::Parameters(format!("band [{lo}, {hi}]")));
        }
        Ok((lo, hi))
    }
}

/// Verdict for one direction `ω = ±1` at one window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionVerdict {
    pub direction: f64,
    pub band: (f64, f64),
    /// `-kappa_hat` of `D_l(eps) = sup_band |spectrum| (1+|xi|)^l`; `None` for a null net
    pub n_hat: Vec<Option<f64>>,
    pub moderate: bool,
    /// `(eps, slope)` of `ln|spectrum|` against `ln(1+|xi|)` on the band
    pub slopes: Vec<(f64, f64)>,
    /// tail eps where the band decay is slower than `(1+|xi|)^{-l_max}`
    pub nonrapid_eps: Vec<f64>,
    pub regular: bool,
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Band points above the floor for one direction and eps: `(|xi|, |spectrum|)`.
fn band_points(spec: &Spectrum, e: usize, dir: f64, band: (f64, f64), params: &WaveParams) -> Vec<(f64, f64)> {
    let vals = &spec.values[e];
    // a reference taken from the spectrum itself would promote dust on tiny products to signal
    let peak = spec.scale.iter().copied().fold(0.0, f64::max);
    let floor = params.floor_rel * peak;
    let r_eps = params.radius_net.at(spec.eps[e]);
    spec.xi
        .iter()
        .zip(vals)
        .filter(|(xi, _)| {
            let r = xi.abs();
            **xi * dir > 0.0 && r >= band.0 && r <= band.1 && r >= r_eps
        })
        .map(|(xi, v)| (xi.abs(), v.norm()))
        .filter(|&(_, v)| v > floor && peak > 0.0)
        .collect()
}

/// `∃ N ∀ l <= l_max`: regular iff on every tail eps the band decays faster than
/// `(1+|xi|)^{-l_max}` (or sits below the floor), every `D_l` is moderate and
/// `max_l n_hat(l) <= n_max`.
pub fn rapid_decrease_test(spec: &Spectrum, directions: &[f64], params: &WaveParams) -> Result<Vec<DirectionVerdict>, WaveError> {
    if params.l_max < 4 {
        return Err(WaveError::Parameters(format!("l_max = {} below 4", params.l_max)));
    }
    let band = params.band_for(spec)?;
    let grid = EpsGrid::new(spec.eps.clone(), GridKind::Explicit)?;
    let tail = grid.tail(params.tail)?;
    let mut out = Vec::with_capacity(directions.len());
    for &dir in directions {
        let mut slopes = Vec::with_capacity(spec.eps.len());
        let mut nonrapid = Vec::new();
        let mut d = vec![vec![0.0; spec.eps.len()]; params.l_max as usize + 1];
        for e in 0..spec.eps.len() {
            let pts = band_points(spec, e, dir, band, params);
            let s = if pts.len() < 3 {
                f64::NEG_INFINITY
            } else {
                let xs: Vec<f64> = pts.iter().map(|p| (1.0 + p.0).ln()).collect();
                let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
                slope(&xs, &ys)
            };
            slopes.push((spec.eps[e], s));
            if tail.contains(&e) && s > -(params.l_max as f64) {
                nonrapid.push(spec.eps[e]);
            }
            for (l, row) in d.iter_mut().enumerate() {
                row[e] = pts.iter().map(|p| p.1 * (1.0 + p.0).powi(l as i32)).fold(0.0, f64::max);
            }
        }
        let mut n_hat = Vec::with_capacity(d.len());
        let mut moderate = true;
        for row in &d {
            let net = EpsNet::from_real(&grid, |x| row[grid.position(x).expect("grid point")])?;
            n_hat.push(match estimate_order(&net, params.tail) {
                Ok(est) if est.kappa_hat.is_finite() => Some(-est.kappa_hat),
                _ => None,
            });
            if let Ok(Classification::ImmoderateSuspect) = classify_net(&net, params.slow_scale_tol) {
                moderate = false;
            }
        }
        let worst = n_hat.iter().flatten().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let regular = nonrapid.is_empty() && moderate && worst <= params.n_max;
        out.push(DirectionVerdict { direction: dir, band, n_hat, moderate, slopes, nonrapid_eps: nonrapid, regular });
    }
    Ok(out)
}

/// Rows `direction, l, eps, radius, value` of `|spectrum| (1+|xi|)^l` on the band,
/// every `stride`-th frequency.
pub fn decay_curves_csv(spec: &Spectrum, directions: &[f64], params: &WaveParams, stride: usize) -> Result<String, WaveError> {
    let band = params.band_for(spec)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| WaveError::Parameters(e.to_string());
    w.write_record(["direction", "l", "eps", "radius", "value"]).map_err(io)?;
    for &dir in directions {
        for l in 0..=params.l_max {
            for e in 0..spec.eps.len() {
                for p in band_points(spec, e, dir, band, params).iter().step_by(stride.max(1)) {
                    let v = p.1 * (1.0 + p.0).powi(l as i32);
                    w.write_record(&[format!("{dir}"), l.to_string(), format!("{:e}", spec.eps[e]), format!("{:e}", p.0), format!("{v:e}")])
                        .map_err(io)?;
                }
            }
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| WaveError::Parameters(e.to_string()))?).map_err(|e| WaveError::Parameters(e.to_string()))
}
