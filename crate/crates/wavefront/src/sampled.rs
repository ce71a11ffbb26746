use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use symexpr::Expr;

use crate::WaveError;

/// `phi(x) = bump((x - x0) / radius)`, so `phi(x0) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowSpec {
    pub center: f64,
    pub radius: f64,
    #[serde(skip)]
    pub phi: Expr,
}

impl WindowSpec {
    pub fn bump(center: f64, radius: f64) -> Result<Self, WaveError> {
        if !(radius > 0.0) || !center.is_finite() {
            return Err(WaveError::Window(format!("center {center}, radius {radius}")));
        }
        Self::new(center, radius, Expr::bump(0, center, radius))
    }

    /// An arbitrary window supported in `[center - radius, center + radius]`.
    pub fn new(center: f64, radius: f64, phi: Expr) -> Result<Self, WaveError> {
        let at = phi.eval(&[center], 0.5)?;
        if (at - Complex64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(WaveError::Window(format!("phi(x0) = {at}, need 1")));
        }
        for x in [center - radius, center + radius, center - 1.5 * radius, center + 1.5 * radius] {
            if phi.eval(&[x], 0.5)?.norm() > 0.0 {
                return Err(WaveError::Window(format!("phi does not vanish at {x}")));
            }
        }
        Ok(WindowSpec { center, radius, phi })
    }

    pub fn lo(&self) -> f64 {
        self.center - self.radius
    }

    pub fn hi(&self) -> f64 {
        self.center + self.radius
    }
}

/// Samples of `u_eps` on the periodic grid `lo + j (hi - lo) / G`, `j < G`.
#[derive(Clone, Debug)]
pub struct SampledNetFunction {
    pub source: Expr,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub eps: Vec<f64>,
    pub samples: Vec<Vec<Complex64>>,
}

impl SampledNetFunction {
    pub fn xs(lo: f64, hi: f64, points: usize) -> Vec<f64> {
        let dx = (hi - lo) / points as f64;
        (0..points).map(|j| lo + dx * j as f64).collect()
    }

    pub fn sample(source: &Expr, lo: f64, hi: f64, points: usize, eps: &[f64]) -> Result<Self, WaveError> {
        if source.max_var().is_some_and(|v| v > 0) {
            return Err(WaveError::Dimension(source.max_var().unwrap_or(0) + 1));
        }
        if points < 16 || !(hi > lo) {
            return Err(WaveError::Parameters(format!("grid [{lo}, {hi}] with {points} points")));
        }
        let xs = Self::xs(lo, hi, points);
        let samples = eps
            .par_iter()
            .map(|&e| {
                xs.iter()
                    .map(|&x| {
                        let v = source.eval(&[x], e)?;
                        if v.re.is_finite() && v.im.is_finite() {
                            Ok(v)
                        } else {
                            Err(WaveError::NonFinite { x, eps: e })
                        }
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SampledNetFunction { source: source.clone(), lo, hi, points, eps: eps.to_vec(), samples })
    }

    pub fn dx(&self) -> f64 {
        (self.hi - self.lo) / self.points as f64
    }
}
