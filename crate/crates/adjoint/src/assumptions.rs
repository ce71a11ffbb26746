use std::collections::BTreeMap;

use conditions::{ConicRegion, NetSummary, Witness};
use epsnet::{EpsGrid, EpsNet, RadiusNet, MACHINE_ZERO};
use rayon::prelude::*;
use serde::Serialize;
use symbols::{MultiIndex, SymbolFamily};
use symexpr::Expr;

use crate::rational::RationalSymbol;
use crate::remainder::{build_remainder, solution_from, GuardRegion};
use crate::AdjointError;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdjointSampling {
    /// base points per active dimension in 1-D; 2-D and 3-D use `x_points_multi`
    pub x_points: usize,
    pub x_points_multi: usize,
    pub radius_net: RadiusNet,
    pub radii: usize,
    /// radii run over `[r_eps, max(r_max, 100 r_eps)]`
    pub r_max: f64,
    pub tail: f64,
    pub slow_scale_tol: f64,
    pub radial_tol: f64,
    pub stability_tol: f64,
    pub min_tau: f64,
}

impl Default for AdjointSampling {
    fn default() -> Self {
        AdjointSampling {
            x_points: 33,
            x_points_multi: 9,
            radius_net: RadiusNet::default(),
            radii: 16,
            r_max: 1e3,
            tail: 0.5,
            slow_scale_tol: 0.1,
            radial_tol: 0.2,
            stability_tol: 0.5,
            min_tau: 0.1,
        }
    }
}

impl AdjointSampling {
    pub fn radii_at(&self, eps: f64) -> Vec<f64> {
        let lo = self.radius_net.at(eps);
        log_spaced(lo, self.r_max.max(100.0 * lo), self.radii)
    }

    pub(crate) fn base_points(&self, lo: &[f64], hi: &[f64]) -> Vec<Vec<f64>> {
        let k = if lo.len() == 1 { self.x_points } else { self.x_points_multi };
        let axes: Vec<Vec<f64>> = lo
            .iter()
            .zip(hi)
            .map(|(&a, &b)| {
                if k < 2 || b <= a {
                    vec![0.5 * (a + b)]
                } else {
                    (0..k).map(|j| a + (b - a) * j as f64 / (k - 1) as f64).collect()
                }
            })
            .collect();
        let mut pts = vec![Vec::new()];
        for axis in &axes {
            pts = pts
                .into_iter()
                .flat_map(|p: Vec<f64>| {
                    axis.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        pts
    }
}

pub(crate) fn log_spaced(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k < 2 || hi <= lo {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..k).map(|j| (a + (b - a) * j as f64 / (k - 1) as f64).exp()).collect()
}

/// Least-squares slope of `ln v` against `ln(1 + r)`; `-inf` if some `v` vanishes.
pub fn loglog_slope(radii: &[f64], v: &[f64]) -> f64 {
    let shifted: Vec<f64> = radii.iter().map(|r| 1.0 + r).collect();
    power_slope(&shifted, v)
}

/// Least-squares slope of `ln v` against `ln r`.
pub fn power_slope(radii: &[f64], v: &[f64]) -> f64 {
    if v.iter().any(|&a| a < MACHINE_ZERO) {
        return f64::NEG_INFINITY;
    }
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = v.iter().map(|a| a.ln()).collect();
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

/// Slope over the outer half of the radii.
fn outer_slope(radii: &[f64], v: &[f64]) -> f64 {
    let s = radii.len() / 2;
    loglog_slope(&radii[s..], &v[s..])
}

/// `sup_{x, dirs} |f(x, r·dir, eps)|` per radius, with the maximizing `(x, xi)`.
pub fn sup_series(
    f: &RationalSymbol,
    xs: &[Vec<f64>],
    dirs: &[Vec<f64>],
    radii: &[f64],
    eps: f64,
) -> Result<Vec<(f64, Vec<f64>, Vec<f64>)>, AdjointError> {
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let mut best = (0.0, xs[0].clone(), dirs[0].iter().map(|d| d * r).collect::<Vec<f64>>());
        for d in dirs {
            let xi: Vec<f64> = d.iter().map(|v| v * r).collect();
            for x in xs {
                let v = f.eval(x, &xi, eps)?.norm();
                if v > best.0 {
                    best = (v, x.clone(), xi.clone());
                }
            }
        }
        out.push(best);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssumptionKind {
    RAsmpt,
    PsiAsmpt,
}

/// One row of the `N, eps, radius, sup_value` series (`n` is `|alpha|` for psi).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialSeries {
    pub n: usize,
    pub eps: f64,
    pub radius: f64,
    pub sup_value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionVerdict {
    pub which: AssumptionKind,
    pub pass: bool,
    pub fitted: BTreeMap<String, f64>,
    pub tau_hat: f64,
    pub radius_net: String,
    pub nets: Vec<NetSummary>,
    pub witnesses: Vec<Witness>,
    pub tolerances: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub series: Vec<RadialSeries>,
}

impl AssumptionVerdict {
    fn new(which: AssumptionKind, opts: &AdjointSampling) -> Self {
        let mut tolerances = BTreeMap::new();
        tolerances.insert("radial_tol".into(), opts.radial_tol);
        tolerances.insert("stability_tol".into(), opts.stability_tol);
        tolerances.insert("slow_scale_tol".into(), opts.slow_scale_tol);
        AssumptionVerdict {
            which,
            pass: true,
            fitted: BTreeMap::new(),
            tau_hat: f64::NAN,
            radius_net: opts.radius_net.describe(),
            nets: Vec::new(),
            witnesses: Vec::new(),
            tolerances,
            notes: vec!["numerical verdict: sampled eps tail, base points, directions and radii".into()],
            series: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["N", "eps", "radius", "sup_value"]).expect("in-memory csv");
        for s in &self.series {
            w.write_record(&[s.n.to_string(), format!("{:e}", s.eps), format!("{:e}", s.radius), format!("{:e}", s.sup_value)])
                .expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
    }
}

/// Everything sampled for one function family: per eps, radii and sups.
struct Sampled {
    radii: Vec<Vec<f64>>,
    sups: Vec<Vec<(f64, Vec<f64>, Vec<f64>)>>,
}

fn sample_all(
    f: &RationalSymbol,
    xs: &[Vec<f64>],
    dirs: &[Vec<f64>],
    grid: &EpsGrid,
    opts: &AdjointSampling,
) -> Result<Sampled, AdjointError> {
    let rows: Vec<_> = grid
        .values()
        .par_iter()
        .map(|&eps| {
            let radii = opts.radii_at(eps);
            sup_series(f, xs, dirs, &radii, eps).map(|s| (radii, s))
        })
        .collect::<Result<_, _>>()?;
    let (radii, sups) = rows.into_iter().unzip();
    Ok(Sampled { radii, sups })
}

fn setup(
    p: &SymbolFamily,
    region: &ConicRegion,
    grid: &EpsGrid,
    opts: &AdjointSampling,
) -> Result<(GuardRegion, Vec<Vec<f64>>, Vec<Vec<f64>>), AdjointError> {
    let n = p.dim();
    if region.dim() != n {
        return Err(AdjointError::Dimension(format!("region of dimension {} for n = {n}", region.dim())));
    }
    let rmin = grid.values().iter().map(|&e| opts.radius_net.at(e)).fold(f64::INFINITY, f64::min);
    let guard = GuardRegion::new(region.lo.clone(), region.hi.clone(), rmin);
    let dirs = region.directions.vectors(n)?;
    let xs = opts.base_points(&region.lo, &region.hi);
    Ok((guard, xs, dirs))
}

fn witness(eps: f64, s: &(f64, Vec<f64>, Vec<f64>), what: String) -> Witness {
    Witness { eps, x: s.1.clone(), xi: s.2.clone(), value: s.0, what }
}

/// `M = max(0, -kappa_hat)` of a prefactor net; a null net gives 0.
fn prefactor_order(net: &EpsNet, tail: f64) -> f64 {
    match epsnet::estimate_order(net, tail) {
        Ok(e) if e.kappa_hat.is_finite() => (-e.kappa_hat).max(0.0),
        Ok(_) => 0.0,
        Err(_) => 0.0,
    }
}

/// Sampled form of `|R^N phi| <= C eps^{-M1} (1 + |xi|)^{-N tau}` for `N = 1..=n_max`.
///
/// Without a supplied `tau` it is fitted as the smallest `-slope / N` over the
/// eps tail; with one, only the prefactor nets are tested.
pub fn check_assumption_r(
    p: &SymbolFamily,
    phi: &Expr,
    region: &ConicRegion,
    n_max: usize,
    grid: &EpsGrid,
    tau: Option<f64>,
    opts: &AdjointSampling,
) -> Result<AssumptionVerdict, AdjointError> {
    let (guard, xs, dirs) = setup(p, region, grid, opts)?;
    let r = build_remainder(p, guard)?;
    let mut v = AssumptionVerdict::new(AssumptionKind::RAsmpt, opts);
    v.tolerances.insert("min_tau".into(), opts.min_tau);
    if r.is_zero() {
        v.tau_hat = f64::INFINITY;
        v.fitted.insert("M1_hat".into(), 0.0);
        v.notes.push("R = 0: every power vanishes".into());
        return Ok(v);
    }
    let sol = solution_from(r, phi, n_max)?;
    let tail = grid.tail(opts.tail)?;
    let mut sampled = Vec::with_capacity(n_max);
    for k in 1..=n_max {
        sampled.push(sample_all(&sol.powers[k], &xs, &dirs, grid, opts)?);
    }
    let eps = grid.values();
    let mut slopes = vec![vec![0.0; eps.len()]; n_max];
    let mut tau_fit = f64::INFINITY;
    for (k, s) in sampled.iter().enumerate() {
        for e in 0..eps.len() {
            let vals: Vec<f64> = s.sups[e].iter().map(|t| t.0).collect();
            slopes[k][e] = outer_slope(&s.radii[e], &vals);
            for (rr, t) in s.radii[e].iter().zip(&s.sups[e]) {
                v.series.push(RadialSeries { n: k + 1, eps: eps[e], radius: *rr, sup_value: t.0 });
            }
            if tail.contains(&e) {
                tau_fit = tau_fit.min(-slopes[k][e] / (k + 1) as f64);
            }
        }
    }
    let tau_used = tau.unwrap_or(tau_fit);
    v.tau_hat = tau_used;
    v.fitted.insert("tau_fit".into(), tau_fit);
    if tau.is_some() {
        v.notes.push(format!("tau = {tau_used} supplied; only the prefactor nets are fitted"));
    }
    let mut m1 = Vec::with_capacity(n_max);
    for (k, s) in sampled.iter().enumerate() {
        let nn = (k + 1) as f64;
        let c: Vec<f64> = (0..eps.len())
            .map(|e| {
                s.radii[e]
                    .iter()
                    .zip(&s.sups[e])
                    .map(|(r, t)| if t.0 == 0.0 { 0.0 } else { t.0 * (1.0 + r).powf(nn * tau_used) })
                    .fold(0.0, f64::max)
            })
            .collect();
        let net = EpsNet::from_real(grid, |x| c[grid.position(x).expect("grid point")])?;
        let m = prefactor_order(&net, opts.tail);
        m1.push(m);
        v.fitted.insert(format!("M1[N={}]", k + 1), m);
        v.fitted.insert(format!("slope_max[N={}]", k + 1), tail.clone().map(|e| slopes[k][e]).fold(f64::NEG_INFINITY, f64::max));
        v.nets.push(NetSummary::new(format!("C[N={}]", k + 1), &net, opts.slow_scale_tol, opts.tail));
        if tau.is_some() {
            continue;
        }
        for e in tail.clone() {
            if slopes[k][e] > -nn * tau_used + opts.radial_tol {
                v.pass = false;
                let last = s.sups[e].last().expect("radii");
                v.witnesses.push(witness(eps[e], last, format!("radial slope {} at N = {}", slopes[k][e], k + 1)));
            }
        }
    }
    let (lo, hi) = m1.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &m| (a.0.min(m), a.1.max(m)));
    v.fitted.insert("M1_hat".into(), hi);
    v.fitted.insert("M1_spread".into(), hi - lo);
    if hi - lo > opts.stability_tol {
        v.pass = false;
        v.notes.push(format!("M1 varies by {} across N", hi - lo));
    }
    if tau.is_none() && !(tau_used >= opts.min_tau) {
        v.pass = false;
        v.notes.push(format!("fitted tau {tau_used} below {}", opts.min_tau));
    }
    if !v.pass && v.witnesses.is_empty() {
        let e = grid.len() - 1;
        let s = &sampled[n_max - 1].sups[e];
        v.witnesses.push(witness(eps[e], s.last().expect("radii"), "largest radius, smallest eps".into()));
    }
    Ok(v)
}

/// Sampled form of `|∂_x^alpha psi| <= C eps^{-M} (1 + |xi|)^{delta |alpha| + tau0}`.
pub fn check_assumption_psi(
    p: &SymbolFamily,
    phi: &Expr,
    region: &ConicRegion,
    n_iter: usize,
    alpha_max: u32,
    grid: &EpsGrid,
    opts: &AdjointSampling,
) -> Result<AssumptionVerdict, AdjointError> {
    let (guard, xs, dirs) = setup(p, region, grid, opts)?;
    let r = build_remainder(p, guard)?;
    let sol = solution_from(r, phi, n_iter)?;
    let tail = grid.tail(opts.tail)?;
    let eps = grid.values();
    let mut v = AssumptionVerdict::new(AssumptionKind::PsiAsmpt, opts);
    let alphas = MultiIndex::up_to(p.dim(), alpha_max);
    let mut sampled = Vec::with_capacity(alphas.len());
    for a in &alphas {
        sampled.push(sample_all(&sol.psi.diff_x_multi(a), &xs, &dirs, grid, opts)?);
    }
    let slope = |k: usize, e: usize| {
        let vals: Vec<f64> = sampled[k].sups[e].iter().map(|t| t.0).collect();
        outer_slope(&sampled[k].radii[e], &vals)
    };
    let tau0 = tail.clone().map(|e| slope(0, e)).fold(f64::NEG_INFINITY, f64::max);
    let mut delta = 0.0f64;
    for (k, a) in alphas.iter().enumerate().skip(1) {
        for e in tail.clone() {
            let s = slope(k, e);
            if s.is_finite() && tau0.is_finite() {
                delta = delta.max((s - tau0) / a.order() as f64);
            }
        }
    }
    v.tau_hat = tau0;
    v.fitted.insert("tau0_hat".into(), tau0);
    v.fitted.insert("delta_hat".into(), delta);
    let mut ms = Vec::new();
    for (k, a) in alphas.iter().enumerate() {
        let expo = delta * a.order() as f64 + if tau0.is_finite() { tau0 } else { 0.0 };
        let s = &sampled[k];
        let c: Vec<f64> = (0..eps.len())
            .map(|e| s.radii[e].iter().zip(&s.sups[e]).map(|(r, t)| if t.0 == 0.0 { 0.0 } else { t.0 * (1.0 + r).powf(-expo) }).fold(0.0, f64::max))
            .collect();
        for e in 0..eps.len() {
            for (rr, t) in s.radii[e].iter().zip(&s.sups[e]) {
                v.series.push(RadialSeries { n: a.order() as usize, eps: eps[e], radius: *rr, sup_value: t.0 });
            }
        }
        let net = EpsNet::from_real(grid, |x| c[grid.position(x).expect("grid point")])?;
        let m = prefactor_order(&net, opts.tail);
        v.fitted.insert(format!("M[alpha={:?}]", a.0), m);
        v.nets.push(NetSummary::new(format!("C[alpha={:?}]", a.0), &net, opts.slow_scale_tol, opts.tail));
        ms.push(m);
    }
    let (lo, hi) = ms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |a, &m| (a.0.min(m), a.1.max(m)));
    v.fitted.insert("M_hat".into(), hi);
    v.fitted.insert("M_spread".into(), hi - lo);
    if hi - lo > opts.stability_tol {
        v.pass = false;
        v.notes.push(format!("M varies by {} across alpha", hi - lo));
    }
    if delta >= 1.0 {
        v.pass = false;
        v.notes.push(format!("delta_hat {delta} is not below 1"));
    }
    if !v.pass {
        let e = grid.len() - 1;
        let s = &sampled[sampled.len() - 1].sups[e];
        v.witnesses.push(witness(eps[e], s.last().expect("radii"), "largest radius, smallest eps".into()));
    }
    Ok(v)
}
