use num_complex::Complex64;
use serde::Serialize;
use symexpr::quad::Composite;
use symexpr::Expr;

use crate::remainder::AdjointSolution;
use crate::AdjointError;

const ORDER: usize = 10;
const QUAD_TOL: f64 = 1e-11;
const MAX_PANELS: usize = 8192;

/// `J + I = total` at one `(xi, eps)`:
/// `J = ∫ (P u) psi e^{-i xi x}`, `I = ∫ u e^{-i xi x} R^N phi`, `total = ∫ phi u e^{-i xi x}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierSplit {
    pub xi: f64,
    pub eps: f64,
    pub j: Complex64,
    pub i: Complex64,
    pub total: Complex64,
    pub identity_error: f64,
}

fn integrate(a: f64, b: f64, xi: f64, f: &(dyn Fn(f64) -> Result<Complex64, AdjointError> + Sync)) -> Result<Complex64, AdjointError> {
    let panels = 32 + ((xi.abs() * (b - a)) / std::f64::consts::PI).ceil() as usize;
    // the change is measured against ∫|f|, since oscillation may cancel the integral itself
    let run = |k: usize| -> Result<(Complex64, f64), AdjointError> {
        let rule = Composite::new(a, b, k, ORDER);
        let mut s = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (x, w) in rule.points.iter().zip(&rule.weights) {
            let v = f(*x)?;
            s += v * *w;
            scale += v.norm() * w;
        }
        Ok((s, scale))
    };
    let (mut prev, _) = run(panels)?;
    let mut k = panels;
    loop {
        k *= 2;
        let (next, scale) = run(k)?;
        let change = (next - prev).norm();
        if change <= QUAD_TOL * scale {
            return Ok(next);
        }
        if k >= MAX_PANELS {
            return Err(AdjointError::Quadrature { xi, change });
        }
        prev = next;
    }
}

/// One-dimensional split over `[a, b]`, which must contain `supp phi`.
pub fn decompose_fourier(
    u: &Expr,
    sol: &AdjointSolution,
    interval: (f64, f64),
    xi_samples: &[f64],
    eps: f64,
) -> Result<Vec<FourierSplit>, AdjointError> {
    let p = sol.remainder.symbol();
    if p.dim() != 1 {
        return Err(AdjointError::Dimension(format!("decompose_fourier is one-dimensional, got n = {}", p.dim())));
    }
    let (a, b) = interval;
    let f = p.apply(u);
    let mut out = Vec::with_capacity(xi_samples.len());
    for &xi in xi_samples {
        let phase = |x: f64| Complex64::new(0.0, -xi * x).exp();
        let j = integrate(a, b, xi, &|x| Ok(f.eval(&[x], eps)? * sol.psi.eval(&[x], &[xi], eps)? * phase(x)))?;
        let i = integrate(a, b, xi, &|x| Ok(u.eval(&[x], eps)? * sol.residual.eval(&[x], &[xi], eps)? * phase(x)))?;
        let total = integrate(a, b, xi, &|x| Ok(sol.phi.eval(&[x], eps)? * u.eval(&[x], eps)? * phase(x)))?;
        let denom = (j.norm() + i.norm()).max(total.norm());
        let identity_error = if denom == 0.0 { 0.0 } else { (j + i - total).norm() / denom };
        out.push(FourierSplit { xi, eps, j, i, total, identity_error });
    }
    Ok(out)
}
