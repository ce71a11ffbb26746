use std::f64::consts::PI;

use epsnet::EpsGrid;
use rayon::prelude::*;
use serde::Serialize;
use symbols::SymbolFamily;

use crate::mh::{check_exponents, deriv_tables, mh1_core, mh2_core};
use crate::principal::{combine, st1_core, st2_inv_core};
use crate::region::fibonacci;
use crate::sample::{box_points, Dirs, Prepared};
use crate::{ConditionError, DirectionSet, Sampling};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ScanMode {
    /// mh1 (fitted `m0` when `None`) and mh2 per wedge
    Mh { m0: Option<f64>, rho: f64, delta: f64, alpha_max: u32 },
    /// principal-part conditions per wedge
    St { gamma_max: u32 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOptions {
    pub direction_count: usize,
    /// splits of the base box along every dimension the coefficients use
    pub cells_per_dim: usize,
    /// relative angular overlap of neighbouring wedges
    pub margin: f64,
    pub wedge_samples: usize,
    pub sampling: Sampling,
}

impl ScanOptions {
    pub fn new(direction_count: usize) -> Self {
        ScanOptions { direction_count, cells_per_dim: 1, margin: 0.1, wedge_samples: 9, sampling: Sampling::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WedgeVerdict {
    pub index: usize,
    pub center: Vec<f64>,
    /// center angle in degrees (2-D only)
    pub angle: Option<f64>,
    pub pass: bool,
    pub q_hat: f64,
    pub m0: f64,
    pub worst_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellResult {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub wedges: Vec<WedgeVerdict>,
    /// maximal passing angular intervals `[from, to]` in degrees (2-D only)
    pub pass_intervals: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConeScanResult {
    pub mode: ScanMode,
    pub dim: usize,
    pub direction_count: usize,
    pub cells: Vec<CellResult>,
    pub all_pass: bool,
}

impl ConeScanResult {
    /// `cell, direction angle, verdict, q_hat, worst ratio`
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["cell", "angle_deg", "verdict", "q_hat", "worst_ratio"]).expect("in-memory write");
        for (c, cell) in self.cells.iter().enumerate() {
            for wv in &cell.wedges {
                let angle = wv.angle.map(|a| format!("{a}")).unwrap_or_else(|| format!("{:?}", wv.center));
                w.write_record([
                    c.to_string(),
                    angle,
                    if wv.pass { "pass" } else { "fail" }.to_string(),
                    wv.q_hat.to_string(),
                    wv.worst_ratio.to_string(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }

    /// Angles (degrees, in [0, 360)) halfway between neighbouring wedges with different verdicts.
    pub fn boundaries(&self, cell: usize) -> Vec<f64> {
        let ws = &self.cells[cell].wedges;
        let k = ws.len();
        let mut out = Vec::new();
        if self.dim != 2 {
            return out;
        }
        for i in 0..k {
            let j = (i + 1) % k;
            if ws[i].pass != ws[j].pass {
                let a = ws[i].angle.unwrap_or(0.0);
                out.push((a + 180.0 / k as f64).rem_euclid(360.0));
            }
        }
        out
    }
}

fn wedges(n: usize, count: usize, margin: f64, samples: usize) -> Vec<(Vec<f64>, Option<f64>, DirectionSet)> {
    match n {
        1 => vec![
            (vec![1.0], None, DirectionSet::Explicit { directions: vec![vec![1.0]] }),
            (vec![-1.0], None, DirectionSet::Explicit { directions: vec![vec![-1.0]] }),
        ],
        2 => (0..count)
            .map(|k| {
                let c = 2.0 * PI * k as f64 / count as f64;
                let half = PI / count as f64 * (1.0 + margin);
                (vec![c.cos(), c.sin()], Some(c.to_degrees()), DirectionSet::Wedge { center: c, half_width: half, count: samples })
            })
            .collect(),
        _ => {
            let half = (1.0 - 2.0 / count as f64).acos() * (1.0 + margin);
            fibonacci(count)
                .into_iter()
                .map(|c| (c.clone(), None, DirectionSet::Cap { center: c, half_angle: half, count: samples.min(7) }))
                .collect()
        }
    }
}

fn cells(lo: &[f64], hi: &[f64], active: &[bool], k: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    if k <= 1 {
        return vec![(lo.to_vec(), hi.to_vec())];
    }
    // corners of the sub-boxes on the k x ... x k lattice
    let widths: Vec<f64> = (0..lo.len()).map(|i| if active[i] { (hi[i] - lo[i]) / k as f64 } else { hi[i] - lo[i] }).collect();
    let (starts, _) = box_points(
        lo,
        &lo.iter().zip(&widths).map(|(l, w)| l + w * (k - 1) as f64).collect::<Vec<_>>(),
        active,
        k,
    );
    starts
        .into_iter()
        .map(|s| {
            let s: Vec<f64> = s.iter().enumerate().map(|(i, v)| if active[i] { *v } else { lo[i] }).collect();
            let e = s.iter().zip(&widths).map(|(a, w)| a + w).collect();
            (s, e)
        })
        .collect()
}

/// Numerical estimate of the set of directions where the chosen conditions hold.
pub fn scan_mg(
    p: &SymbolFamily,
    lo: &[f64],
    hi: &[f64],
    grid: &EpsGrid,
    mode: &ScanMode,
    opts: &ScanOptions,
) -> Result<ConeScanResult, ConditionError> {
    if opts.direction_count < 16 {
        return Err(ConditionError::Parameters(format!("direction_count {} < 16", opts.direction_count)));
    }
    if let ScanMode::Mh { rho, delta, alpha_max, .. } = mode {
        check_exponents(*rho, *delta, *alpha_max)?;
    }
    let n = p.dim();
    let s = &opts.sampling;
    let whole = Prepared::new(p, lo, hi, grid, s)?;
    let ws = wedges(n, opts.direction_count, opts.margin, opts.wedge_samples);
    let mut out = Vec::new();
    for (clo, chi) in cells(lo, hi, &whole.active, opts.cells_per_dim) {
        let prep = Prepared::new(p, &clo, &chi, grid, s)?;
        let tables = match mode {
            ScanMode::Mh { alpha_max, .. } => deriv_tables(&prep, *alpha_max)?,
            ScanMode::St { .. } => Vec::new(),
        };
        let st_shared = match mode {
            ScanMode::St { gamma_max } => Some(st2_inv_core(&prep, *gamma_max)?),
            ScanMode::Mh { .. } => None,
        };
        let verdicts = ws
            .par_iter()
            .enumerate()
            .map(|(index, (center, angle, set))| {
                let dirs = Dirs::new(set, n)?;
                let (pass, q_hat, m0, worst_ratio) = match mode {
                    ScanMode::Mh { m0, rho, delta, .. } => {
                        let r1 = mh1_core(&prep, &dirs, *m0)?;
                        let r2 = mh2_core(&prep, &dirs, &tables, *rho, *delta)?;
                        let m0v = r1.fitted.get("m0").or(r1.fitted.get("m0_hat")).copied().unwrap_or(f64::NAN);
                        (r1.pass && r2.pass, r1.fitted["q_hat"], m0v, r2.fitted["s_sup_tail"])
                    }
                    ScanMode::St { .. } => {
                        let (st2, inv) = st_shared.clone().expect("shared st parts");
                        let st1 = st1_core(&prep, &dirs)?;
                        let worst = st1.fitted["s_at_eps_min"];
                        let rep = combine(&prep, &dirs, st1, st2, inv);
                        let q = rep.fitted.get("inv.p_hat").copied().unwrap_or(f64::INFINITY);
                        (rep.pass, q, p.degree() as f64, worst)
                    }
                };
                Ok(WedgeVerdict { index, center: center.clone(), angle: *angle, pass, q_hat, m0, worst_ratio })
            })
            .collect::<Result<Vec<_>, ConditionError>>()?;
        let pass_intervals = if n == 2 { intervals(&verdicts) } else { Vec::new() };
        out.push(CellResult { lo: clo, hi: chi, wedges: verdicts, pass_intervals });
    }
    let all_pass = out.iter().all(|c| c.wedges.iter().all(|w| w.pass));
    Ok(ConeScanResult { mode: mode.clone(), dim: n, direction_count: ws.len(), cells: out, all_pass })
}

/// Maximal runs of passing wedges, as `[start, end]` in degrees (end may exceed 360).
fn intervals(ws: &[WedgeVerdict]) -> Vec<[f64; 2]> {
    let k = ws.len();
    let half = 180.0 / k as f64;
    if ws.iter().all(|w| w.pass) {
        return vec![[0.0, 360.0]];
    }
    let start = ws.iter().position(|w| !w.pass).expect("some failing wedge");
    let mut out = Vec::new();
    let mut run: Option<usize> = None;
    for step in 1..=k {
        let i = (start + step) % k;
        match (ws[i].pass, run) {
            (true, None) => run = Some(step),
            (false, Some(first)) => {
                let a = ws[(start + first) % k].angle.unwrap_or(0.0) - half;
                let len = (step - first) as f64 * 2.0 * half;
                out.push([a.rem_euclid(360.0), a.rem_euclid(360.0) + len]);
                run = None;
            }
            _ => {}
        }
    }
    out
}
