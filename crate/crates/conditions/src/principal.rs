use epsnet::{check_invertible, EpsGrid, EpsNet, InvertibilityVerdict, MACHINE_ZERO};
use rayon::prelude::*;
use serde::Serialize;
use symbols::{MultiIndex, SymbolFamily};

use crate::mh::{deriv_tables, mh1_core, mh2_core};
use crate::report::{ConditionId, ConditionReport, NetSummary, Witness};
use crate::sample::{scaled, Dirs, Prepared};
use crate::{ConditionError, ConicRegion, Sampling};

/// `num / den` with `0/0 = 0` and `x/0 = inf`.
fn ratio(num: f64, den: f64) -> f64 {
    if den < MACHINE_ZERO {
        if num < MACHINE_ZERO {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

fn finite_net(grid: &EpsGrid, vals: &[f64]) -> Result<EpsNet, ConditionError> {
    Ok(EpsNet::from_real(grid, |x| {
        let v = vals[grid.position(x).expect("grid point")];
        if v.is_finite() {
            v
        } else {
            f64::MAX
        }
    })?)
}

/// Principal-part conditions: `st1`, `st2` and invertibility of `b_m = sum_{|α|=m} |a_α|`.
pub fn check_principal(
    p: &SymbolFamily,
    region: &ConicRegion,
    grid: &EpsGrid,
    gamma_max: u32,
    sampling: &Sampling,
) -> Result<ConditionReport, ConditionError> {
    let prep = Prepared::new(p, &region.lo, &region.hi, grid, sampling)?;
    let dirs = Dirs::new(&region.directions, region.dim())?;
    let st1 = st1_core(&prep, &dirs)?;
    let (st2, inv) = st2_inv_core(&prep, gamma_max)?;
    Ok(combine(&prep, &dirs, st1, st2, inv))
}

pub(crate) fn combine(
    prep: &Prepared,
    dirs: &Dirs,
    st1: ConditionReport,
    st2: ConditionReport,
    inv: ConditionReport,
) -> ConditionReport {
    let mut rep = ConditionReport::new(ConditionId::Principal, prep.region_string(&dirs.describe), prep.radius_string());
    rep.pass = st1.pass && st2.pass && inv.pass;
    for part in [&st1, &st2, &inv] {
        rep.witnesses.extend(part.witnesses.iter().cloned());
        for (k, v) in &part.fitted {
            rep.fitted.insert(format!("{:?}.{k}", part.condition).to_lowercase(), *v);
        }
    }
    if rep.pass {
        // |P_m| >= b_m (1+|xi|)^m / s, and b_m >= eps^p
        let s1 = st1.fitted.get("s_at_eps_min").copied().unwrap_or(f64::NAN);
        let ph = inv.fitted.get("p_hat").copied().unwrap_or(f64::NAN);
        rep.fitted.insert("derived.lower_bound_factor".into(), 1.0 / s1);
        rep.fitted.insert("derived.q".into(), ph);
        rep.fitted.insert("derived.m0".into(), prep.p.degree() as f64);
        rep.notes.push(format!(
            "derived: |P_m| >= (1+|xi|)^m b_m / s with s = {s1:.4} at the smallest eps, and b_m >= eps^{ph}"
        ));
    }
    rep.parts = vec![st1, st2, inv];
    rep
}

pub(crate) fn st1_core(prep: &Prepared, dirs: &Dirs) -> Result<ConditionReport, ConditionError> {
    let s = prep.s;
    let eps = prep.eps();
    let m = prep.p.degree() as i32;
    let pm = prep.p.principal_part();
    let tm = prep.table(&pm)?;
    let mut rep = ConditionReport::new(ConditionId::St1, prep.region_string(&dirs.describe), prep.radius_string());
    rep.tolerances.insert("slow_scale_tol".into(), s.slow_scale_tol);
    let rows: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..eps.len())
        .into_par_iter()
        .map(|e| {
            let (mut best, mut arg) = (0.0f64, (Vec::new(), Vec::new()));
            for (j, cv) in tm[e].iter().enumerate() {
                let b: f64 = cv.terms().iter().map(|(_, v)| v.norm()).sum();
                for dir in &dirs.vecs {
                    for &r in &prep.radii[e] {
                        let xi = scaled(dir, r);
                        let q = ratio(b * (1.0 + r).powi(m), cv.eval(&xi).norm());
                        if q > best || arg.0.is_empty() {
                            best = best.max(q);
                            arg = (prep.xs[j].clone(), xi);
                        }
                    }
                }
            }
            (best, arg.0, arg.1)
        })
        .collect();
    let vals: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let last = eps.len() - 1;
    if let Some(e) = prep.tail.clone().find(|&e| vals[e].is_infinite()) {
        rep.fail(Witness { eps: eps[e], x: rows[e].1.clone(), xi: rows[e].2.clone(), value: f64::INFINITY, what: "P_m vanishes where b_m > 0".into() });
    }
    let sum = NetSummary::new("b_m (1+|xi|)^m / |P_m|", &finite_net(prep.grid, &vals)?, s.slow_scale_tol, s.tail_fraction);
    if rep.pass && !sum.is_slow_scale() {
        rep.fail(Witness { eps: eps[last], x: rows[last].1.clone(), xi: rows[last].2.clone(), value: vals[last], what: "st1 ratio is not slow scale".into() });
    }
    rep.fitted.insert("s_at_eps_min".into(), vals[last]);
    rep.nets.push(sum);
    Ok(rep)
}

/// `st2` nets `sup_K |∂^γ a_β| / b_m` and the invertibility of `inf_K b_m`.
pub(crate) fn st2_inv_core(prep: &Prepared, gamma_max: u32) -> Result<(ConditionReport, ConditionReport), ConditionError> {
    let s = prep.s;
    let eps = prep.eps();
    let grid = prep.grid;
    let n = prep.p.dim();
    let pts = prep.dense_points();
    let pm = prep.p.principal_part();
    let region = prep.region_string("directions not used");
    let mut st2 = ConditionReport::new(ConditionId::St2, region.clone(), prep.radius_string());
    let mut inv = ConditionReport::new(ConditionId::Inv, region, prep.radius_string());
    st2.tolerances.insert("slow_scale_tol".into(), s.slow_scale_tol);

    // b_m at every (eps, dense point)
    let bm: Vec<Vec<f64>> = eps
        .par_iter()
        .map(|&e| pts.iter().map(|x| pm.principal_weight(x, e).map_err(ConditionError::from)).collect())
        .collect::<Result<_, _>>()?;

    let last = eps.len() - 1;
    for (beta, a) in prep.p.coeffs() {
        for gamma in MultiIndex::up_to(n, gamma_max) {
            let d = a.diff_multi(&gamma.0);
            if d.is_zero() {
                continue;
            }
            let rows: Vec<(f64, usize)> = eps
                .par_iter()
                .enumerate()
                .map(|(e, &ev)| {
                    let (mut best, mut arg) = (0.0f64, 0);
                    for (j, x) in pts.iter().enumerate() {
                        let q = ratio(d.eval(x, ev)?.norm(), bm[e][j]);
                        if q > best {
                            best = q;
                            arg = j;
                        }
                    }
                    Ok((best, arg))
                })
                .collect::<Result<_, ConditionError>>()?;
            let vals: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let name = format!("sup|d^{:?} a_{:?}| / b_m", gamma.0, beta.0);
            let sum = NetSummary::new(name.clone(), &finite_net(grid, &vals)?, s.slow_scale_tol, s.tail_fraction);
            let inf_at = prep.tail.clone().find(|&e| vals[e].is_infinite());
            if let Some(e) = inf_at {
                st2.fail(Witness { eps: eps[e], x: pts[rows[e].1].clone(), xi: Vec::new(), value: f64::INFINITY, what: format!("{name}: b_m vanishes") });
            } else if !sum.is_slow_scale() {
                st2.fail(Witness { eps: eps[last], x: pts[rows[last].1].clone(), xi: Vec::new(), value: vals[last], what: format!("{name} is not slow scale") });
                if let Some(k) = sum.kappa_hat {
                    let key = "kappa_min".to_string();
                    let prev = st2.fitted.get(&key).copied().unwrap_or(f64::INFINITY);
                    st2.fitted.insert(key, prev.min(k));
                }
            }
            st2.nets.push(sum);
        }
    }

    let (inf_vals, inf_args): (Vec<f64>, Vec<usize>) = bm
        .iter()
        .map(|row| row.iter().enumerate().fold((f64::INFINITY, 0), |acc, (j, &v)| if v < acc.0 { (v, j) } else { acc }))
        .unzip();
    let net = EpsNet::from_real(grid, |x| inf_vals[grid.position(x).expect("grid point")])?;
    inv.nets.push(NetSummary::new("inf_K b_m", &net, s.slow_scale_tol, s.tail_fraction));
    match check_invertible(&net) {
        InvertibilityVerdict::Invertible { p_hat } => {
            inv.fitted.insert("p_hat".into(), p_hat);
        }
        InvertibilityVerdict::NotInvertible { zero_witnesses, null_like } => {
            for e0 in &zero_witnesses {
                let e = grid.position(*e0).expect("grid point");
                inv.fail(Witness { eps: *e0, x: pts[inf_args[e]].clone(), xi: Vec::new(), value: inf_vals[e], what: "b_m vanishes".into() });
            }
            if null_like {
                inv.fail(Witness { eps: eps[last], x: pts[inf_args[last]].clone(), xi: Vec::new(), value: inf_vals[last], what: "b_m decays faster than any power".into() });
            }
            inv.pass = false;
        }
    }
    Ok((st2, inv))
}

/// Both routes to the ratio and lower bounds, side by side.
#[derive(Clone, Debug, Serialize)]
pub struct CrossCheck {
    pub principal: ConditionReport,
    pub mh1: ConditionReport,
    pub mh2: ConditionReport,
    pub agree: bool,
}

/// Runs mh2 (`rho = 1, delta = 0`) and mh1 (`m0 = m`) once the principal-part conditions hold.
pub fn cross_check_st_implies_mh(
    p: &SymbolFamily,
    region: &ConicRegion,
    grid: &EpsGrid,
    sampling: &Sampling,
) -> Result<CrossCheck, ConditionError> {
    let prep = Prepared::new(p, &region.lo, &region.hi, grid, sampling)?;
    let dirs = Dirs::new(&region.directions, region.dim())?;
    let st1 = st1_core(&prep, &dirs)?;
    let (st2, inv) = st2_inv_core(&prep, 1)?;
    let principal = combine(&prep, &dirs, st1, st2, inv);
    if !principal.pass {
        let failed: Vec<String> =
            principal.parts.iter().filter(|r| !r.pass).map(|r| format!("{:?}", r.condition).to_lowercase()).collect();
        return Err(ConditionError::Precondition(format!("principal-part conditions fail: {}", failed.join(", "))));
    }
    let mh1 = mh1_core(&prep, &dirs, Some(p.degree() as f64))?;
    let tables = deriv_tables(&prep, 1)?;
    let mh2 = mh2_core(&prep, &dirs, &tables, 1.0, 0.0)?;
    let agree = mh1.pass && mh2.pass;
    Ok(CrossCheck { principal, mh1, mh2, agree })
}
