use epsnet::{EpsGrid, EpsNet, MACHINE_ZERO};
use rayon::prelude::*;
use symbols::{CoefficientValues, MultiIndex, SymbolFamily};

use crate::report::{ConditionId, ConditionReport, NetSummary, Witness};
use crate::sample::{radial_slope, scaled, Dirs, Prepared};
use crate::{ConditionError, ConicRegion, DirectionSet, Sampling};

/// Lower bound `|P| >= eps^q (1 + |xi|)^m0` on the sampled region.
///
/// `m0 = None` fits `m0_hat` as the least outer radial slope of `ln min |P|`
/// over the eps tail.
pub fn check_mh1(
    p: &SymbolFamily,
    region: &ConicRegion,
    grid: &EpsGrid,
    m0: Option<f64>,
    sampling: &Sampling,
) -> Result<ConditionReport, ConditionError> {
    let prep = Prepared::new(p, &region.lo, &region.hi, grid, sampling)?;
    let dirs = Dirs::new(&region.directions, region.dim())?;
    mh1_core(&prep, &dirs, m0)
}

pub(crate) fn mh1_core(prep: &Prepared, dirs: &Dirs, m0: Option<f64>) -> Result<ConditionReport, ConditionError> {
    let s = prep.s;
    let eps = prep.eps();
    let tail = prep.tail.clone();
    let envs = (0..eps.len())
        .into_par_iter()
        .map(|e| prep.envelope(e, dirs, tail.contains(&e)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rep = ConditionReport::new(ConditionId::Mh1, prep.region_string(&dirs.describe), prep.radius_string());
    rep.tolerances.insert("radial_tol".into(), s.radial_tol);
    rep.tolerances.insert("tail_fraction".into(), s.tail_fraction);
    rep.tolerances.insert("slow_scale_tol".into(), s.slow_scale_tol);

    let slopes0: Vec<f64> = envs.iter().zip(&prep.radii).map(|(en, r)| radial_slope(r, &en.min_abs)).collect();
    let (m0v, fitted) = match m0 {
        Some(v) => (v, false),
        None => {
            let m = tail.clone().map(|e| slopes0[e]).fold(f64::INFINITY, f64::min);
            (if m.is_finite() { m } else { 0.0 }, true)
        }
    };
    if fitted {
        rep.fitted.insert("m0_hat".into(), m0v);
        rep.notes.push(format!("pass at fitted m0 = {m0v:.4}"));
    } else {
        rep.fitted.insert("m0".into(), m0v);
        rep.notes.push(format!("pass at user m0 = {m0v}"));
    }

    // L(eps) = min_r min|P| (1+r)^{-m0}, with its argmin
    let mut lvals = Vec::with_capacity(eps.len());
    let mut largs = Vec::with_capacity(eps.len());
    for (e, en) in envs.iter().enumerate() {
        let (mut best, mut arg) = (f64::INFINITY, 0);
        for (k, &r) in prep.radii[e].iter().enumerate() {
            let v = en.min_abs[k] * (1.0 + r).powf(-m0v);
            if v < best {
                best = v;
                arg = k;
            }
        }
        lvals.push(best);
        largs.push(arg);
    }
    let net = EpsNet::from_real(prep.grid, |x| lvals[prep.grid.position(x).expect("grid point")])?;
    rep.nets.push(NetSummary::new("L", &net, s.slow_scale_tol, s.tail_fraction));

    let zero_tail = tail.clone().any(|e| lvals[e] < MACHINE_ZERO);
    if zero_tail {
        for (e, &v) in lvals.iter().enumerate() {
            if v < MACHINE_ZERO {
                let (x, xi) = envs[e].at[largs[e]].clone();
                rep.fail(Witness { eps: eps[e], x, xi, value: v, what: "P vanishes".into() });
            }
        }
        rep.fitted.insert("q_hat".into(), f64::INFINITY);
        return Ok(rep);
    }
    let q_hat = tail.clone().map(|e| lvals[e].ln() / eps[e].ln()).fold(f64::NEG_INFINITY, f64::max);
    rep.fitted.insert("q_hat".into(), q_hat);

    let mut worst_slope = f64::INFINITY;
    for e in tail.clone() {
        let slope = slopes0[e] - m0v;
        worst_slope = worst_slope.min(slope);
        if slope < -s.radial_tol {
            let k = prep.radii[e].len() - 1;
            let (x, xi) = envs[e].at[k].clone();
            let v = envs[e].min_abs[k] * (1.0 + prep.radii[e][k]).powf(-m0v);
            rep.fail(Witness { eps: eps[e], x, xi, value: v, what: format!("radial slope {slope:.3} of the lower bound") });
        }
    }
    rep.fitted.insert("radial_slope_min".into(), worst_slope);
    let worst = tail.clone().max_by(|&a, &b| (lvals[a].ln() / eps[a].ln()).total_cmp(&(lvals[b].ln() / eps[b].ln())));
    if let Some(e) = worst {
        rep.ensure_witness(|| {
            let (x, xi) = envs[e].at[largs[e]].clone();
            Witness { eps: eps[e], x, xi, value: lvals[e], what: "worst lower bound".into() }
        });
    }
    Ok(rep)
}

/// Symbol derivatives entering the ratio bounds.
pub(crate) struct DerivTable {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub vals: Vec<Vec<CoefficientValues>>,
}

pub(crate) fn deriv_tables(prep: &Prepared, alpha_max: u32) -> Result<Vec<DerivTable>, ConditionError> {
    let n = prep.p.dim();
    let m = prep.p.degree();
    let mut out = Vec::new();
    for alpha in MultiIndex::up_to(n, alpha_max) {
        for beta in MultiIndex::up_to(n, m) {
            if alpha.order() == 0 && beta.order() == 0 {
                continue;
            }
            let d = prep.p.deriv(&alpha, &beta);
            if d.is_zero() {
                continue;
            }
            let vals = prep.table(&d)?;
            out.push(DerivTable { alpha: alpha.clone(), beta, vals });
        }
    }
    Ok(out)
}

fn label(a: &MultiIndex, b: &MultiIndex) -> String {
    format!("s[alpha={:?},beta={:?}]", a.0, b.0)
}

/// Ratio bounds `|∂_x^α ∂_ξ^β P| <= s |P| (1 + |xi|)^{δ|α| - ρ|β|}` with slow-scale `s`.
pub fn check_mh2(
    p: &SymbolFamily,
    region: &ConicRegion,
    grid: &EpsGrid,
    rho: f64,
    delta: f64,
    alpha_max: u32,
    sampling: &Sampling,
) -> Result<ConditionReport, ConditionError> {
    check_exponents(rho, delta, alpha_max)?;
    let prep = Prepared::new(p, &region.lo, &region.hi, grid, sampling)?;
    let dirs = Dirs::new(&region.directions, region.dim())?;
    let tables = deriv_tables(&prep, alpha_max)?;
    mh2_core(&prep, &dirs, &tables, rho, delta)
}

pub(crate) fn check_exponents(rho: f64, delta: f64, alpha_max: u32) -> Result<(), ConditionError> {
    if !(0.0 <= delta && delta < rho && rho <= 1.0) {
        return Err(ConditionError::Parameters(format!("need 0 <= delta < rho <= 1, got rho = {rho}, delta = {delta}")));
    }
    if alpha_max < 1 {
        return Err(ConditionError::Parameters("alpha_max must be at least 1".into()));
    }
    Ok(())
}

struct RatioSweep {
    sup: Vec<f64>,
    arg: Vec<(Vec<f64>, Vec<f64>)>,
    excluded: usize,
    total: usize,
}

pub(crate) fn mh2_core(
    prep: &Prepared,
    dirs: &Dirs,
    tables: &[DerivTable],
    rho: f64,
    delta: f64,
) -> Result<ConditionReport, ConditionError> {
    let s = prep.s;
    let eps = prep.eps();
    let mut rep = ConditionReport::new(ConditionId::Mh2, prep.region_string(&dirs.describe), prep.radius_string());
    rep.fitted.insert("rho".into(), rho);
    rep.fitted.insert("delta".into(), delta);
    rep.tolerances.insert("slow_scale_tol".into(), s.slow_scale_tol);
    rep.tolerances.insert("max_excluded".into(), s.max_excluded);
    rep.tolerances.insert("tail_fraction".into(), s.tail_fraction);
    let weights: Vec<f64> =
        tables.iter().map(|t| delta * t.alpha.order() as f64 - rho * t.beta.order() as f64).collect();
    let sweeps: Vec<RatioSweep> = (0..eps.len())
        .into_par_iter()
        .map(|e| {
            let mut sw = RatioSweep {
                sup: vec![0.0; tables.len()],
                arg: vec![(Vec::new(), Vec::new()); tables.len()],
                excluded: 0,
                total: 0,
            };
            for (j, cv) in prep.vals[e].iter().enumerate() {
                for dir in &dirs.vecs {
                    for &r in &prep.radii[e] {
                        let xi = scaled(dir, r);
                        let pv = cv.eval(&xi).norm();
                        sw.total += 1;
                        if pv < MACHINE_ZERO {
                            sw.excluded += 1;
                            continue;
                        }
                        for (t, tab) in tables.iter().enumerate() {
                            let ratio = tab.vals[e][j].eval(&xi).norm() / (pv * (1.0 + r).powf(weights[t]));
                            if ratio > sw.sup[t] {
                                sw.sup[t] = ratio;
                                sw.arg[t] = (prep.xs[j].clone(), xi.clone());
                            }
                        }
                    }
                }
            }
            sw
        })
        .collect();
    let excluded: usize = sweeps.iter().map(|w| w.excluded).sum();
    let total: usize = sweeps.iter().map(|w| w.total).sum();
    let frac = excluded as f64 / total.max(1) as f64;
    rep.fitted.insert("excluded_fraction".into(), frac);
    if frac > s.max_excluded {
        for (e, w) in sweeps.iter().enumerate() {
            if w.excluded > 0 {
                rep.fail(Witness {
                    eps: eps[e],
                    x: Vec::new(),
                    xi: Vec::new(),
                    value: w.excluded as f64 / w.total.max(1) as f64,
                    what: "fraction of samples with vanishing P".into(),
                });
            }
        }
    }
    let mut sup_tail = 0.0f64;
    for (t, tab) in tables.iter().enumerate() {
        let vals: Vec<f64> = sweeps.iter().map(|w| w.sup[t]).collect();
        let net = EpsNet::from_real(prep.grid, |x| vals[prep.grid.position(x).expect("grid point")])?;
        let sum = NetSummary::new(label(&tab.alpha, &tab.beta), &net, s.slow_scale_tol, s.tail_fraction);
        for e in prep.tail.clone() {
            sup_tail = sup_tail.max(vals[e]);
        }
        if !sum.is_slow_scale() {
            let e = prep.tail.clone().max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(eps.len() - 1);
            let e = if vals[eps.len() - 1] > 0.0 { eps.len() - 1 } else { e };
            let (x, xi) = sweeps[e].arg[t].clone();
            rep.fail(Witness { eps: eps[e], x, xi, value: vals[e], what: format!("{} is not slow scale", sum.name) });
        }
        rep.nets.push(sum);
    }
    rep.fitted.insert("s_sup_tail".into(), sup_tail);
    Ok(rep)
}

pub fn default_direction_count(n: usize) -> usize {
    match n {
        1 => 2,
        2 => 64,
        _ => 256,
    }
}

/// mh1 with `m0 = m` and mh2 with `rho = 1, delta = 0` over the whole direction sphere.
pub fn check_wh_elliptic(
    p: &SymbolFamily,
    lo: &[f64],
    hi: &[f64],
    grid: &EpsGrid,
    sampling: &Sampling,
) -> Result<ConditionReport, ConditionError> {
    let region =
        ConicRegion::new(lo.to_vec(), hi.to_vec(), DirectionSet::Sphere { count: default_direction_count(p.dim()) })?;
    let prep = Prepared::new(p, lo, hi, grid, sampling)?;
    let dirs = Dirs::new(&region.directions, region.dim())?;
    let mh1 = mh1_core(&prep, &dirs, Some(p.degree() as f64))?;
    let tables = deriv_tables(&prep, 1)?;
    let mh2 = mh2_core(&prep, &dirs, &tables, 1.0, 0.0)?;
    let mut rep = ConditionReport::new(ConditionId::Wh, prep.region_string(&dirs.describe), prep.radius_string());
    rep.pass = mh1.pass && mh2.pass;
    for part in [&mh1, &mh2] {
        rep.witnesses.extend(part.witnesses.iter().cloned());
        for (k, v) in &part.fitted {
            rep.fitted.insert(format!("{:?}.{k}", part.condition).to_lowercase(), *v);
        }
    }
    rep.parts = vec![mh1, mh2];
    rep.ensure_witness(|| Witness { eps: grid.min(), x: Vec::new(), xi: Vec::new(), value: f64::NAN, what: "wh".into() });
    Ok(rep)
}
