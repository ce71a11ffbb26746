use conditions::{ConditionId, ConditionReport, ConicRegion, NetSummary, Witness};
use epsnet::{EpsGrid, EpsNet};
use rayon::prelude::*;
use symbols::{MultiIndex, SymbolFamily};

use crate::assumptions::{sup_series, AdjointSampling};
use crate::remainder::{build_remainder, GuardRegion};
use crate::AdjointError;

/// `|∂_x^alpha r_beta| <= c_eps (1 + |xi|)^{-rho|beta| + delta|alpha|}` for `beta != 0`
/// and `(1 + |xi|)^{-(rho - delta) + delta|alpha|}` for `beta = 0`, with `c_eps` slow scale.
#[allow(clippy::too_many_arguments)]
pub fn check_remainder_coefficient_bounds(
    p: &SymbolFamily,
    region: &ConicRegion,
    grid: &EpsGrid,
    rho: f64,
    delta: f64,
    alpha_max: u32,
    opts: &AdjointSampling,
) -> Result<ConditionReport, AdjointError> {
    if !(0.0 <= delta && delta < rho && rho <= 1.0) {
        return Err(AdjointError::Parameters(format!("need 0 <= delta < rho <= 1, got rho = {rho}, delta = {delta}")));
    }
    let n = p.dim();
    if region.dim() != n {
        return Err(AdjointError::Dimension(format!("region of dimension {} for n = {n}", region.dim())));
    }
    let rmin = grid.values().iter().map(|&e| opts.radius_net.at(e)).fold(f64::INFINITY, f64::min);
    let r = build_remainder(p, GuardRegion::new(region.lo.clone(), region.hi.clone(), rmin))?;
    let dirs = region.directions.vectors(n)?;
    let xs = opts.base_points(&region.lo, &region.hi);
    let mut rep = ConditionReport::new(
        ConditionId::RemainderCoefficients,
        format!("K = {:?} x {:?}, {} directions", region.lo, region.hi, dirs.len()),
        opts.radius_net.describe(),
    );
    rep.tolerances.insert("radial_tol".into(), opts.radial_tol);
    rep.tolerances.insert("slow_scale_tol".into(), opts.slow_scale_tol);
    rep.fitted.insert("rho".into(), rho);
    rep.fitted.insert("delta".into(), delta);
    if r.is_zero() {
        rep.notes.push("every r_beta vanishes".into());
        return Ok(rep);
    }
    let tail = grid.tail(opts.tail)?;
    let eps = grid.values();
    for (beta, rb) in &r.coeffs {
        for alpha in MultiIndex::up_to(n, alpha_max) {
            let f = rb.diff_x_multi(&alpha);
            let b = beta.order() as f64;
            let a = alpha.order() as f64;
            let expo = if beta.order() == 0 { -(rho - delta) + delta * a } else { -rho * b + delta * a };
            let name = format!("r[beta={:?}] d_x^{:?}", beta.0, alpha.0);
            let rows: Vec<_> = eps
                .par_iter()
                .map(|&e| {
                    let radii = opts.radii_at(e);
                    sup_series(&f, &xs, &dirs, &radii, e).map(|s| (radii, s))
                })
                .collect::<Result<_, _>>()?;
            let mut worst = f64::NEG_INFINITY;
            let mut c = Vec::with_capacity(eps.len());
            for (e, (radii, s)) in rows.iter().enumerate() {
                let vals: Vec<f64> = s.iter().map(|t| t.0).collect();
                let h = radii.len() / 2;
                let slope = crate::assumptions::loglog_slope(&radii[h..], &vals[h..]);
                c.push(radii.iter().zip(&vals).map(|(r, v)| if *v == 0.0 { 0.0 } else { v * (1.0 + r).powf(-expo) }).fold(0.0, f64::max));
                if tail.contains(&e) {
                    worst = worst.max(slope);
                    if slope > expo + opts.radial_tol {
                        let t = s.last().expect("radii");
                        rep.fail(Witness {
                            eps: eps[e],
                            x: t.1.clone(),
                            xi: t.2.clone(),
                            value: t.0,
                            what: format!("{name}: radial slope {slope} above {expo}"),
                        });
                    }
                }
            }
            rep.fitted.insert(format!("{name} slope_max"), worst);
            rep.fitted.insert(format!("{name} exponent"), expo);
            let net = EpsNet::from_real(grid, |x| c[grid.position(x).expect("grid point")])?;
            let summary = NetSummary::new(format!("c[{name}]"), &net, opts.slow_scale_tol, opts.tail);
            if !summary.is_slow_scale() {
                let e = eps.len() - 1;
                let t = rows[e].1.last().expect("radii");
                rep.fail(Witness {
                    eps: eps[e],
                    x: t.1.clone(),
                    xi: t.2.clone(),
                    value: c[e],
                    what: format!("prefactor of {name} is not slow scale"),
                });
            }
            rep.nets.push(summary);
        }
    }
    Ok(rep)
}
