use std::f64::consts::PI;

use epsnet::RadiusNet;
use serde::{Deserialize, Serialize};

use crate::ConditionError;

/// Sampled directions of a cone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DirectionSet {
    /// Unit vectors as given; never refined.
    Explicit { directions: Vec<Vec<f64>> },
    /// 2-D wedge of angles `center ± half_width` (radians), refined by angular search.
    Wedge { center: f64, half_width: f64, count: usize },
    /// 3-D cap around `center` of angular radius `half_angle`.
    Cap { center: Vec<f64>, half_angle: f64, count: usize },
    /// The whole sphere: `±1` in 1-D, `count` equal angles in 2-D, a Fibonacci sphere in 3-D.
    Sphere { count: usize },
}

impl DirectionSet {
    pub fn vectors(&self, n: usize) -> Result<Vec<Vec<f64>>, ConditionError> {
        let dirs = match self {
            DirectionSet::Explicit { directions } => {
                let mut out = Vec::with_capacity(directions.len());
                for d in directions {
                    if d.len() != n {
                        return Err(ConditionError::Region(format!("direction {d:?} is not {n}-dimensional")));
                    }
                    let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if !(norm > 0.0) {
                        return Err(ConditionError::Region("zero direction".into()));
                    }
                    out.push(d.iter().map(|v| v / norm).collect());
                }
                out
            }
            DirectionSet::Wedge { .. } => {
                if n != 2 {
                    return Err(ConditionError::Region("angular wedges need n = 2".into()));
                }
                self.wedge_angles().unwrap_or_default().into_iter().map(|a| vec![a.cos(), a.sin()]).collect()
            }
            DirectionSet::Cap { center, half_angle, count } => {
                if n != 3 || center.len() != 3 {
                    return Err(ConditionError::Region("caps need n = 3".into()));
                }
                cap(center, *half_angle, *count)
            }
            DirectionSet::Sphere { count } => sphere(n, *count)?,
        };
        if dirs.is_empty() {
            return Err(ConditionError::Region("no directions".into()));
        }
        Ok(dirs)
    }

    /// Sample angles of a wedge, increasing from `center - half_width`.
    pub fn wedge_angles(&self) -> Option<Vec<f64>> {
        match self {
            DirectionSet::Wedge { center, half_width, count } => {
                let k = (*count).max(1);
                Some(
                    (0..k)
                        .map(|j| {
                            let t = if k == 1 { 0.0 } else { -1.0 + 2.0 * j as f64 / (k - 1) as f64 };
                            center + t * half_width
                        })
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Angular interval searched by refinement, if any.
    pub fn angle_range(&self) -> Option<(f64, f64)> {
        match self {
            DirectionSet::Wedge { center, half_width, .. } => Some((center - half_width, center + half_width)),
            _ => None,
        }
    }
}

pub fn sphere(n: usize, count: usize) -> Result<Vec<Vec<f64>>, ConditionError> {
    Ok(match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count).map(|k| 2.0 * PI * k as f64 / count as f64).map(|a| vec![a.cos(), a.sin()]).collect(),
        3 => fibonacci(count),
        _ => return Err(ConditionError::Region(format!("direction sampling for n = {n} is not supported"))),
    })
}

pub fn fibonacci(count: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * k as f64;
            vec![r * a.cos(), r * a.sin(), z]
        })
        .collect()
}

fn cap(center: &[f64], half_angle: f64, count: usize) -> Vec<Vec<f64>> {
    let norm = center.iter().map(|v| v * v).sum::<f64>().sqrt();
    let c: Vec<f64> = center.iter().map(|v| v / norm).collect();
    // orthonormal frame (c, u, w)
    let helper = if c[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let mut u = cross(&c, &helper);
    let un = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    u.iter_mut().for_each(|v| *v /= un);
    let w = cross(&c, &u);
    let mut out = vec![c.clone()];
    let ring = count.saturating_sub(1).max(1);
    for j in 0..ring {
        let phi = 2.0 * PI * j as f64 / ring as f64;
        let (s, co) = half_angle.sin_cos();
        out.push((0..3).map(|i| co * c[i] + s * (phi.cos() * u[i] + phi.sin() * w[i])).collect());
    }
    out
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// A box `K` times a sampled cone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConicRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub directions: DirectionSet,
}

impl ConicRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, directions: DirectionSet) -> Result<Self, ConditionError> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(ConditionError::Region("box corners of different dimension".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(ConditionError::Region("empty box".into()));
        }
        Ok(ConicRegion { lo, hi, directions })
    }

    /// Box with the full direction sphere.
    pub fn full(lo: Vec<f64>, hi: Vec<f64>, count: usize) -> Result<Self, ConditionError> {
        Self::new(lo, hi, DirectionSet::Sphere { count })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }
}

/// Sampling and tolerance parameters shared by the checkers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub x_points: usize,
    pub radii: usize,
    pub r_max: f64,
    pub radius_net: RadiusNet,
    pub tail_fraction: f64,
    pub slow_scale_tol: f64,
    /// least radial slope of the lower-bound envelope over the outer radii
    pub radial_tol: f64,
    pub refine_rounds: usize,
    /// fraction of samples with vanishing `P` tolerated by ratio checks
    pub max_excluded: f64,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            x_points: 16,
            radii: 24,
            r_max: 1e3,
            radius_net: RadiusNet::default(),
            tail_fraction: epsnet::DEFAULT_TAIL_FRACTION,
            slow_scale_tol: epsnet::DEFAULT_SLOW_SCALE_TOL,
            radial_tol: 0.2,
            refine_rounds: 3,
            max_excluded: 0.01,
        }
    }
}

impl Sampling {
    /// Log-spaced radii in `[r_eps, r_max]`.
    pub fn radii_at(&self, eps: f64) -> Vec<f64> {
        let lo = self.radius_net.at(eps).min(self.r_max);
        let k = self.radii.max(2);
        let (a, b) = (lo.ln(), self.r_max.ln());
        (0..k).map(|j| (a + (b - a) * j as f64 / (k - 1) as f64).exp()).collect()
    }
}
