use std::ops::Range;

use epsnet::{EpsGrid, MACHINE_ZERO};
use rayon::prelude::*;
use symbols::{CoefficientValues, SymbolFamily};

use crate::{ConditionError, DirectionSet, Sampling};

const GOLDEN_ITERS: usize = 30;

/// Per-cell sampling state: base points, radii and coefficient values for every `(eps, x)`.
pub(crate) struct Prepared<'a> {
    pub p: &'a SymbolFamily,
    pub grid: &'a EpsGrid,
    pub s: &'a Sampling,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub active: Vec<bool>,
    pub xs: Vec<Vec<f64>>,
    /// grid spacing per active dimension, 0 for collapsed ones
    pub dx: Vec<f64>,
    pub tail: Range<usize>,
    pub radii: Vec<Vec<f64>>,
    pub vals: Vec<Vec<CoefficientValues>>,
}

/// Sampled directions plus what the angular search may use.
pub(crate) struct Dirs {
    pub vecs: Vec<Vec<f64>>,
    pub angles: Option<Vec<f64>>,
    pub range: Option<(f64, f64)>,
    pub describe: String,
}

impl Dirs {
    pub fn new(set: &DirectionSet, n: usize) -> Result<Self, ConditionError> {
        let vecs = set.vectors(n)?;
        let angles = set.wedge_angles();
        Ok(Dirs { vecs, angles, range: set.angle_range(), describe: describe(set) })
    }

    fn step(&self) -> f64 {
        match (&self.angles, self.range) {
            (Some(a), Some((lo, hi))) if a.len() > 1 => (hi - lo) / (a.len() - 1) as f64,
            (_, Some((lo, hi))) => hi - lo,
            _ => 0.0,
        }
    }
}

fn describe(set: &DirectionSet) -> String {
    match set {
        DirectionSet::Explicit { directions } => format!("{} explicit directions", directions.len()),
        DirectionSet::Wedge { center, half_width, count } => format!(
            "wedge {:.3} deg +- {:.3} deg ({count} samples)",
            center.to_degrees(),
            half_width.to_degrees()
        ),
        DirectionSet::Cap { center, half_angle, count } => {
            format!("cap around {center:?}, radius {:.3} deg ({count} samples)", half_angle.to_degrees())
        }
        DirectionSet::Sphere { count } => format!("full sphere ({count} samples)"),
    }
}

/// Equally spaced points on `[lo, hi]`, or the midpoint for collapsed dimensions.
pub(crate) fn box_points(lo: &[f64], hi: &[f64], active: &[bool], per_dim: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = lo.len();
    let mut axes = Vec::with_capacity(n);
    let mut dx = vec![0.0; n];
    for i in 0..n {
        if active[i] && per_dim > 1 && hi[i] > lo[i] {
            let k = per_dim;
            dx[i] = (hi[i] - lo[i]) / (k - 1) as f64;
            axes.push((0..k).map(|j| lo[i] + dx[i] * j as f64).collect::<Vec<_>>());
        } else {
            axes.push(vec![0.5 * (lo[i] + hi[i])]);
        }
    }
    let mut pts = vec![Vec::with_capacity(n)];
    for axis in &axes {
        pts = pts.into_iter().flat_map(|p| axis.iter().map(move |&v| {
            let mut q = p.clone();
            q.push(v);
            q
        })).collect();
    }
    (pts, dx)
}

impl<'a> Prepared<'a> {
    pub fn new(
        p: &'a SymbolFamily,
        lo: &[f64],
        hi: &[f64],
        grid: &'a EpsGrid,
        s: &'a Sampling,
    ) -> Result<Self, ConditionError> {
        let n = p.dim();
        if lo.len() != n || hi.len() != n {
            return Err(ConditionError::Region(format!("box of dimension {} for a symbol in {n} variables", lo.len())));
        }
        let mut active = vec![false; n];
        for e in p.coeffs().values() {
            for v in e.free_vars() {
                active[v] = true;
            }
        }
        let (xs, dx) = box_points(lo, hi, &active, s.x_points);
        let tail = grid.tail(s.tail_fraction)?;
        let radii = grid.values().iter().map(|&e| s.radii_at(e)).collect();
        let mut prep =
            Prepared { p, grid, s, lo: lo.to_vec(), hi: hi.to_vec(), active, xs, dx, tail, radii, vals: Vec::new() };
        prep.vals = prep.table(p)?;
        Ok(prep)
    }

    pub fn eps(&self) -> &[f64] {
        self.grid.values()
    }

    pub fn depends_on_x(&self) -> bool {
        self.active.iter().any(|&a| a)
    }

    /// Coefficient values of `q` at every `(eps, x)`.
    pub fn table(&self, q: &SymbolFamily) -> Result<Vec<Vec<CoefficientValues>>, ConditionError> {
        self.eps()
            .par_iter()
            .map(|&e| self.xs.iter().map(|x| q.coefficient_values(x, e).map_err(ConditionError::from)).collect())
            .collect()
    }

    /// Denser base points for sup-norm nets of coefficients.
    pub fn dense_points(&self) -> Vec<Vec<f64>> {
        let k = match self.active.iter().filter(|&&a| a).count() {
            0 | 1 => 257,
            2 => 33,
            _ => 9,
        };
        box_points(&self.lo, &self.hi, &self.active, k).0
    }

    pub fn region_string(&self, dirs: &str) -> String {
        format!("K = {:?} x {:?}; {dirs}", self.lo, self.hi)
    }

    pub fn radius_string(&self) -> String {
        format!("{}; radii log-spaced up to {}", self.s.radius_net.describe(), self.s.r_max)
    }
}

/// Lower envelope `min |P|` over base points and directions, per radius.
pub(crate) struct Envelope {
    pub min_abs: Vec<f64>,
    pub at: Vec<(Vec<f64>, Vec<f64>)>,
}

pub(crate) fn scaled(dir: &[f64], r: f64) -> Vec<f64> {
    dir.iter().map(|d| d * r).collect()
}

fn polar(t: f64, r: f64) -> Vec<f64> {
    vec![r * t.cos(), r * t.sin()]
}

pub(crate) fn golden_min<E>(
    a: f64,
    b: f64,
    mut f: impl FnMut(f64) -> Result<f64, E>,
) -> Result<(f64, f64), E> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..GOLDEN_ITERS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

impl Prepared<'_> {
    /// `min |P|` per radius at grid index `e`; refined when `refine` is set.
    pub fn envelope(&self, e: usize, dirs: &Dirs, refine: bool) -> Result<Envelope, ConditionError> {
        let eps = self.eps()[e];
        let radii = &self.radii[e];
        let mut min_abs = vec![f64::INFINITY; radii.len()];
        let mut best = vec![(0usize, 0usize); radii.len()];
        for (j, cv) in self.vals[e].iter().enumerate() {
            for (d, dir) in dirs.vecs.iter().enumerate() {
                for (k, &r) in radii.iter().enumerate() {
                    let v = cv.eval(&scaled(dir, r)).norm();
                    if v < min_abs[k] {
                        min_abs[k] = v;
                        best[k] = (j, d);
                    }
                }
            }
        }
        let mut at = Vec::with_capacity(radii.len());
        for (k, &r) in radii.iter().enumerate() {
            let (j, d) = best[k];
            let mut x = self.xs[j].clone();
            let mut xi = scaled(&dirs.vecs[d], r);
            if refine && self.s.refine_rounds > 0 && min_abs[k] >= MACHINE_ZERO {
                let theta = dirs.angles.as_ref().map(|a| a[d]);
                let (v, x2, xi2) = self.refine(eps, r, x, xi, theta, dirs, min_abs[k])?;
                min_abs[k] = v;
                x = x2;
                xi = xi2;
            }
            at.push((x, xi));
        }
        Ok(Envelope { min_abs, at })
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &self,
        eps: f64,
        r: f64,
        mut x: Vec<f64>,
        mut xi: Vec<f64>,
        mut theta: Option<f64>,
        dirs: &Dirs,
        mut best: f64,
    ) -> Result<(f64, Vec<f64>, Vec<f64>), ConditionError> {
        let h = dirs.step();
        let refine_x = self.depends_on_x();
        for _ in 0..self.s.refine_rounds {
            if let (Some(t0), Some((a, b))) = (theta, dirs.range) {
                let cv = self.p.coefficient_values(&x, eps)?;
                let (t, v) = golden_min::<ConditionError>((t0 - h).max(a), (t0 + h).min(b), |t| Ok(cv.eval(&polar(t, r)).norm()))?;
                if v < best {
                    best = v;
                    theta = Some(t);
                    xi = polar(t, r);
                }
            }
            if refine_x {
                for i in 0..x.len() {
                    if !self.active[i] {
                        continue;
                    }
                    let lo = (x[i] - self.dx[i]).max(self.lo[i]);
                    let hi = (x[i] + self.dx[i]).min(self.hi[i]);
                    let mut y = x.clone();
                    let (v_i, v) = golden_min::<ConditionError>(lo, hi, |v| {
                        y[i] = v;
                        Ok(self.p.eval(&y, &xi, eps)?.norm())
                    })?;
                    if v < best {
                        best = v;
                        x[i] = v_i;
                    }
                }
            }
            if best < MACHINE_ZERO {
                break;
            }
        }
        Ok((best, x, xi))
    }
}

/// Least-squares slope of `ln v` against `ln(1 + r)` over the outer half of the radii.
pub(crate) fn radial_slope(radii: &[f64], v: &[f64]) -> f64 {
    let k = radii.len();
    let start = k / 2;
    if v[start..].iter().any(|&a| a < MACHINE_ZERO) {
        return f64::NEG_INFINITY;
    }
    let xs: Vec<f64> = radii[start..].iter().map(|r| (1.0 + r).ln()).collect();
    let ys: Vec<f64> = v[start..].iter().map(|a| a.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}
