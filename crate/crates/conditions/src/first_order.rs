use epsnet::{EpsGrid, EpsNet, MACHINE_ZERO};
use rayon::prelude::*;
use symbols::{MultiIndex, SymbolFamily};

use crate::report::{ConditionId, ConditionReport, NetSummary, Witness};
use crate::sample::{scaled, Dirs, Prepared};
use crate::{ConditionError, ConicRegion, Sampling};

/// Sup-norm nets `sup_K |∂^γ a|` for every coefficient and `|γ| <= k_max`.
pub(crate) fn coefficient_sup(
    prep: &Prepared,
    k_max: u32,
) -> Result<Vec<(String, Vec<f64>, Vec<Vec<f64>>)>, ConditionError> {
    let pts = prep.dense_points();
    let n = prep.p.dim();
    let mut out = Vec::new();
    for (alpha, a) in prep.p.coeffs() {
        for gamma in MultiIndex::up_to(n, k_max) {
            let d = a.diff_multi(&gamma.0);
            if d.is_zero() {
                continue;
            }
            let rows = prep
                .eps()
                .par_iter()
                .map(|&e| {
                    let (mut best, mut arg) = (0.0f64, pts[0].clone());
                    for x in &pts {
                        let v = d.eval(x, e)?.norm();
                        if v > best {
                            best = v;
                            arg = x.clone();
                        }
                    }
                    Ok((best, arg))
                })
                .collect::<Result<Vec<_>, ConditionError>>()?;
            let (vals, args) = rows.into_iter().unzip();
            out.push((format!("sup|d^{:?} a_{:?}|", gamma.0, alpha.0), vals, args));
        }
    }
    Ok(out)
}

/// First-order operators: slow-scale coefficient derivatives and `|P_1| >= (1 + |xi|) / s`.
pub fn check_first_order(
    p: &SymbolFamily,
    region: &ConicRegion,
    grid: &EpsGrid,
    k_max: u32,
    sampling: &Sampling,
) -> Result<ConditionReport, ConditionError> {
    if p.degree() != 1 {
        return Err(ConditionError::Degree { expected: 1, got: p.degree() });
    }
    let prep = Prepared::new(p, &region.lo, &region.hi, grid, sampling)?;
    let dirs = Dirs::new(&region.directions, region.dim())?;
    let s = sampling;
    let eps = grid.values();
    let mut rep = ConditionReport::new(ConditionId::FirstOrder, prep.region_string(&dirs.describe), prep.radius_string());
    rep.tolerances.insert("slow_scale_tol".into(), s.slow_scale_tol);
    rep.tolerances.insert("k_max".into(), k_max as f64);
    let last = eps.len() - 1;

    for (name, vals, args) in coefficient_sup(&prep, k_max)? {
        let net = EpsNet::from_real(grid, |x| vals[grid.position(x).expect("grid point")])?;
        let sum = NetSummary::new(name, &net, s.slow_scale_tol, s.tail_fraction);
        if !sum.is_slow_scale() {
            rep.fail(Witness { eps: eps[last], x: args[last].clone(), xi: Vec::new(), value: vals[last], what: format!("{} is not slow scale", sum.name) });
        }
        rep.nets.push(sum);
    }

    // s_eps = sup (1 + |xi|) / |P_1|
    let p1 = p.principal_part();
    let t1 = prep.table(&p1)?;
    let rows: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..eps.len())
        .map(|e| {
            let (mut best, mut arg) = (0.0f64, (Vec::new(), Vec::new()));
            for (j, cv) in t1[e].iter().enumerate() {
                for dir in &dirs.vecs {
                    for &r in &prep.radii[e] {
                        let xi = scaled(dir, r);
                        let v = cv.eval(&xi).norm();
                        let ratio = if v < MACHINE_ZERO { f64::INFINITY } else { (1.0 + r) / v };
                        if ratio > best {
                            best = ratio;
                            arg = (prep.xs[j].clone(), xi);
                        }
                    }
                }
            }
            (best, arg.0, arg.1)
        })
        .collect();
    let svals: Vec<f64> = rows.iter().map(|r| r.0).collect();
    if let Some(e) = prep.tail.clone().find(|&e| svals[e].is_infinite()) {
        rep.fail(Witness { eps: eps[e], x: rows[e].1.clone(), xi: rows[e].2.clone(), value: f64::INFINITY, what: "P_1 vanishes".into() });
        return Ok(rep);
    }
    let finite: Vec<f64> = svals.iter().map(|v| if v.is_finite() { *v } else { f64::MAX }).collect();
    let net = EpsNet::from_real(grid, |x| finite[grid.position(x).expect("grid point")])?;
    let sum = NetSummary::new("s", &net, s.slow_scale_tol, s.tail_fraction);
    if !sum.is_slow_scale() {
        rep.fail(Witness { eps: eps[last], x: rows[last].1.clone(), xi: rows[last].2.clone(), value: svals[last], what: "s = sup (1+|xi|)/|P_1| is not slow scale".into() });
    }
    rep.fitted.insert("s_at_eps_min".into(), svals[last]);
    if let Some(k) = sum.kappa_hat {
        rep.fitted.insert("s_kappa_hat".into(), k);
    }
    rep.nets.push(sum);

    if rep.pass {
        margin(&prep, &dirs, &svals, &mut rep)?;
    }
    Ok(rep)
}

/// `|P| >= (1 + |xi|) / (2 s)` for `|xi| >= 2 s s0`, `s0 = sup |a_0|`.
fn margin(prep: &Prepared, dirs: &Dirs, svals: &[f64], rep: &mut ConditionReport) -> Result<(), ConditionError> {
    let eps = prep.eps();
    let zero = MultiIndex::zero(prep.p.dim());
    let pts = prep.dense_points();
    let mut worst = f64::INFINITY;
    let mut thresholds = Vec::new();
    for e in prep.tail.clone() {
        let s0 = match prep.p.coeff(&zero) {
            Some(a) => pts.iter().map(|x| a.eval(x, eps[e]).map(|v| v.norm())).try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))?,
            None => 0.0,
        };
        let thr = 2.0 * svals[e] * s0;
        thresholds.push(thr);
        for cv in &prep.vals[e] {
            for dir in &dirs.vecs {
                for &r in prep.radii[e].iter().filter(|&&r| r >= thr) {
                    let v = cv.eval(&scaled(dir, r)).norm();
                    worst = worst.min(v * 2.0 * svals[e] / (1.0 + r));
                }
            }
        }
    }
    rep.fitted.insert("margin_threshold_at_eps_min".into(), *thresholds.last().unwrap_or(&0.0));
    rep.fitted.insert("margin_min".into(), worst);
    if worst.is_finite() && worst < 1.0 {
        rep.notes.push(format!("first-order margin not met at sampled points: min ratio {worst:.4}"));
    } else {
        rep.notes.push("|P| >= (1+|xi|)/(2 s) holds at every sampled point beyond 2 s s0".into());
    }
    Ok(())
}

/// `sup_K |∂^γ a_α|` as eps-nets with verdicts, for every coefficient and `|γ| <= k_max`.
pub fn coefficient_sup_nets(
    p: &SymbolFamily,
    lo: &[f64],
    hi: &[f64],
    grid: &EpsGrid,
    k_max: u32,
    sampling: &Sampling,
) -> Result<Vec<NetSummary>, ConditionError> {
    let prep = Prepared::new(p, lo, hi, grid, sampling)?;
    coefficient_sup(&prep, k_max)?
        .into_iter()
        .map(|(name, vals, _)| {
            let net = EpsNet::from_real(grid, |x| vals[grid.position(x).expect("grid point")])?;
            Ok(NetSummary::new(name, &net, sampling.slow_scale_tol, sampling.tail_fraction))
        })
        .collect()
}
