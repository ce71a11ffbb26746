use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{EpsError, EpsGrid};

/// One complex sample per grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsNet {
    grid: EpsGrid,
    samples: Vec<Complex64>,
}

impl EpsNet {
    pub fn new(grid: EpsGrid, samples: Vec<Complex64>) -> Result<Self, EpsError> {
        if samples.len() != grid.len() {
            return Err(EpsError::LengthMismatch { expected: grid.len(), got: samples.len() });
        }
        if let Some(index) = samples.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(EpsError::NonFinite { index });
        }
        Ok(EpsNet { grid, samples })
    }

    pub fn from_fn(grid: &EpsGrid, f: impl Fn(f64) -> Complex64) -> Result<Self, EpsError> {
        let samples = grid.values().iter().map(|&e| f(e)).collect();
        Self::new(grid.clone(), samples)
    }

    pub fn from_real(grid: &EpsGrid, f: impl Fn(f64) -> f64) -> Result<Self, EpsError> {
        Self::from_fn(grid, |e| Complex64::new(f(e), 0.0))
    }

    pub fn grid(&self) -> &EpsGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sample at a grid point, matched to 1e-12 relative.
    pub fn at(&self, eps: f64) -> Option<Complex64> {
        self.grid.position(eps).map(|i| self.samples[i])
    }

    pub fn abs(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm()).collect()
    }

    pub fn scale(&self, lambda: Complex64) -> Result<Self, EpsError> {
        Self::new(self.grid.clone(), self.samples.iter().map(|z| z * lambda).collect())
    }

    /// Pointwise reciprocal; zero samples stay zero.
    pub fn recip(&self) -> Result<Self, EpsError> {
        let s = self
            .samples
            .iter()
            .map(|z| if z.norm() == 0.0 { Complex64::new(0.0, 0.0) } else { z.inv() })
            .collect();
        Self::new(self.grid.clone(), s)
    }
}
