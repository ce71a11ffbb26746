use serde::{Deserialize, Serialize};

use crate::EpsError;

pub(crate) const MIN_GRID_LEN: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// `eps_j = 2^-j`
    Dyadic,
    /// `eps_k = 1/k`
    Reciprocal,
    /// `{1/k} ∪ {2/(2k+1)}`: every resonant point has its non-resonant neighbour
    ReciprocalMidpoints,
    /// anything else, e.g. a refinement of one of the above
    Explicit,
}

/// Strictly decreasing sample points in (0, 1], at least eight of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpsGrid {
    values: Vec<f64>,
    kind: GridKind,
}

impl EpsGrid {
    pub fn new(values: Vec<f64>, kind: GridKind) -> Result<Self, EpsError> {
        if values.len() < MIN_GRID_LEN {
            return Err(EpsError::InvalidGrid(format!(
                "{} points, need at least {MIN_GRID_LEN}",
                values.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v > 0.0 && v <= 1.0) {
                return Err(EpsError::InvalidGrid(format!("value {v} at {i} outside (0, 1]")));
            }
            if i > 0 && v >= values[i - 1] {
                return Err(EpsError::InvalidGrid(format!("not strictly decreasing at {i}")));
            }
        }
        let grid = EpsGrid { values, kind };
        if kind == GridKind::ReciprocalMidpoints {
            for (k, &v) in grid.values.iter().enumerate() {
                if let Some(kk) = resonant_index(v) {
                    let mid = 2.0 / (2.0 * kk as f64 + 1.0);
                    if grid.position(mid).is_none() {
                        return Err(EpsError::InvalidGrid(format!(
                            "midpoint {mid} missing for 1/{kk} (index {k})"
                        )));
                    }
                }
            }
        }
        Ok(grid)
    }

    /// `2^-j` for `j = jmin..=jmax`.
    pub fn dyadic(jmin: u32, jmax: u32) -> Result<Self, EpsError> {
        let values = (jmin..=jmax).map(|j| 2f64.powi(-(j as i32))).collect();
        Self::new(values, GridKind::Dyadic)
    }

    /// `2^-1 .. 2^-40`
    pub fn default_dyadic() -> Self {
        Self::dyadic(1, 40).expect("static grid")
    }

    /// `1/k` for `k = 1..=kmax`.
    pub fn reciprocal(kmax: u32) -> Result<Self, EpsError> {
        let values = (1..=kmax).map(|k| 1.0 / k as f64).collect();
        Self::new(values, GridKind::Reciprocal)
    }

    /// `1/k` and `2/(2k+1)` for `k = 1..=kmax`, interleaved in decreasing order.
    pub fn reciprocal_midpoints(kmax: u32) -> Result<Self, EpsError> {
        let mut values = Vec::with_capacity(2 * kmax as usize);
        for k in 1..=kmax {
            values.push(1.0 / k as f64);
            values.push(2.0 / (2.0 * k as f64 + 1.0));
        }
        Self::new(values, GridKind::ReciprocalMidpoints)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        *self.values.last().expect("non-empty grid")
    }

    /// Index range of the smallest-eps tail: `ceil(fraction * len)` points, at least 5.
    pub fn tail(&self, fraction: f64) -> Result<std::ops::Range<usize>, EpsError> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(EpsError::BadTailFraction(fraction));
        }
        let n = self.values.len();
        let k = ((fraction * n as f64).ceil() as usize).max(5).min(n);
        Ok(n - k..n)
    }

    /// Index of `eps` in the grid, matched to 1e-12 relative.
    pub fn position(&self, eps: f64) -> Option<usize> {
        self.values.iter().position(|&v| (v - eps).abs() <= 1e-12 * eps)
    }

    /// Merge extra points in. The result is an explicit grid.
    pub fn refined(&self, extra: &[f64]) -> Result<Self, EpsError> {
        let mut values: Vec<f64> = self.values.iter().chain(extra).copied().collect();
        values.sort_by(|a, b| b.partial_cmp(a).expect("finite grid values"));
        values.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * *b);
        Self::new(values, GridKind::Explicit)
    }
}

/// `Some(k)` when `1/eps` is the integer `k` (to 1e-9 relative).
pub(crate) fn resonant_index(eps: f64) -> Option<u64> {
    let inv = 1.0 / eps;
    let k = inv.round();
    ((inv - k).abs() <= 1e-9 * inv).then_some(k as u64)
}

impl EpsGrid {
    /// True when `1/eps` is a natural number.
    pub fn is_resonant(eps: f64) -> bool {
        resonant_index(eps).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_default_shape() {
        let g = EpsGrid::default_dyadic();
        assert_eq!(g.len(), 40);
        assert_eq!(g.values()[0], 0.5);
        assert_eq!(g.min(), 2f64.powi(-40));
        assert_eq!(g.tail(0.5).unwrap(), 20..40);
    }

    #[test]
    fn midpoints_interleave() {
        let g = EpsGrid::reciprocal_midpoints(4).unwrap();
        let want = [1.0, 2.0 / 3.0, 0.5, 0.4, 1.0 / 3.0, 2.0 / 7.0, 0.25, 2.0 / 9.0];
        assert_eq!(g.values(), &want);
        assert!(EpsGrid::is_resonant(0.25));
        assert!(!EpsGrid::is_resonant(0.4));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(EpsGrid::dyadic(1, 5).is_err());
        let up: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        assert!(EpsGrid::new(up, GridKind::Explicit).is_err());
        let mut v: Vec<f64> = (1..=9).map(|k| 1.0 / k as f64).collect();
        v[0] = 1.5;
        assert!(EpsGrid::new(v, GridKind::Explicit).is_err());
        // drop the midpoint 2/5 after 1/2
        let v = vec![1.0, 2.0 / 3.0, 0.5, 1.0 / 3.0, 2.0 / 7.0, 0.25, 2.0 / 9.0, 0.2, 2.0 / 11.0];
        assert!(EpsGrid::new(v, GridKind::ReciprocalMidpoints).is_err());
    }

    #[test]
    fn short_tail_is_padded_to_five() {
        let g = EpsGrid::dyadic(1, 8).unwrap();
        assert_eq!(g.tail(0.1).unwrap(), 3..8);
        assert!(g.tail(0.0).is_err());
    }
}
