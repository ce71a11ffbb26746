//! The fixed bump template `exp(-1/(1-t^2))` on (-1, 1).
//!
//! `psi` is normalized to integral one; its derivatives are
//! `psi^(k)(t) = psi(t) p_k(t) / (1-t^2)^(2k)` with integer polynomials `p_k`.
//! The primitive is tabulated on [-1, 0] and extended by symmetry, so
//! `Phi(0) = 1/2` exactly.

use std::sync::OnceLock;

use crate::quad::gauss_legendre;

const TABLE_INTERVALS: usize = 1024;
const MAX_CACHED_ORDER: usize = 40;

struct Tables {
    /// `∫_{-1}^{t_j} exp(-1/(1-s^2)) ds` at `t_j = -1 + j/1024`, `j = 0..=1024`
    cumulative: Vec<f64>,
    /// raw integral over (-1, 1)
    z: f64,
    polys: Vec<Vec<f64>>,
    gl_t: Vec<f64>,
    gl_w: Vec<f64>,
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let (gl_t, gl_w) = gauss_legendre(8);
        let h = 1.0 / TABLE_INTERVALS as f64;
        let mut cumulative = vec![0.0; TABLE_INTERVALS + 1];
        for j in 0..TABLE_INTERVALS {
            let a = -1.0 + j as f64 * h;
            cumulative[j + 1] = cumulative[j] + gl(&gl_t, &gl_w, a, a + h);
        }
        let z = 2.0 * cumulative[TABLE_INTERVALS];
        let mut polys = vec![vec![1.0]];
        for k in 0..MAX_CACHED_ORDER {
            let next = next_poly(&polys[k], k);
            polys.push(next);
        }
        Tables { cumulative, z, polys, gl_t, gl_w }
    })
}

fn raw(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

fn gl(t: &[f64], w: &[f64], a: f64, b: f64) -> f64 {
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    t.iter().zip(w).map(|(ti, wi)| wi * raw(m + r * ti)).sum::<f64>() * r
}

/// `p_{k+1} = -2t p_k + (1-t^2)^2 p_k' + 4k t (1-t^2) p_k`
fn next_poly(p: &[f64], k: usize) -> Vec<f64> {
    let deg = p.len() + 3;
    let mut out = vec![0.0; deg];
    let kk = 4.0 * k as f64;
    for (i, &c) in p.iter().enumerate() {
        // -2t p
        out[i + 1] += -2.0 * c;
        // 4k t (1 - t^2) p = 4k (t - t^3) p
        out[i + 1] += kk * c;
        out[i + 3] -= kk * c;
        // (1 - 2t^2 + t^4) p'
        if i >= 1 {
            let d = i as f64 * c;
            out[i - 1] += d;
            out[i + 1] -= 2.0 * d;
            out[i + 3] += d;
        }
    }
    while out.len() > 1 && *out.last().unwrap() == 0.0 {
        out.pop();
    }
    out
}

/// Integral of `exp(-1/(1-t^2))` over (-1, 1).
pub fn raw_integral() -> f64 {
    tables().z
}

fn poly(k: usize) -> std::borrow::Cow<'static, [f64]> {
    let t = tables();
    if k < t.polys.len() {
        std::borrow::Cow::Borrowed(&t.polys[k])
    } else {
        let mut p = t.polys.last().unwrap().clone();
        for j in t.polys.len() - 1..k {
            p = next_poly(&p, j);
        }
        std::borrow::Cow::Owned(p)
    }
}

/// `k`-th derivative of the normalized mollifier template.
pub fn psi(k: u32, t: f64) -> f64 {
    let s = 1.0 - t * t;
    if !(s > 0.0) {
        return 0.0;
    }
    let p = poly(k as usize);
    let pv = p.iter().rev().fold(0.0, |acc, c| acc * t + c);
    if pv == 0.0 {
        return 0.0;
    }
    let log_mag = -1.0 / s - 2.0 * k as f64 * s.ln() + pv.abs().ln() - tables().z.ln();
    if log_mag < -745.0 {
        return 0.0;
    }
    pv.signum() * log_mag.exp()
}

/// Bump with peak value one: `exp(1 - 1/(1-t^2))`.
pub fn bump(t: f64) -> f64 {
    let s = 1.0 - t * t;
    if s <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / s).exp()
    }
}

/// `bump = BUMP_FACTOR * psi`
pub fn bump_factor() -> f64 {
    std::f64::consts::E * tables().z
}

/// Primitive of `psi`: 0 left of the support, 1 right of it.
pub fn step(t: f64) -> f64 {
    if t <= -1.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    if t > 0.0 {
        return 1.0 - step(-t);
    }
    if t == 0.0 {
        return 0.5;
    }
    let tb = tables();
    let pos = (t + 1.0) * TABLE_INTERVALS as f64;
    let j = (pos.floor() as usize).min(TABLE_INTERVALS - 1);
    let a = -1.0 + j as f64 / TABLE_INTERVALS as f64;
    (tb.cumulative[j] + gl(&tb.gl_t, &tb.gl_w, a, t)) / tb.z
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::Composite;

    #[test]
    fn normalization_constant() {
        // independent fine composite rule
        let q = Composite::new(-1.0, 1.0, 4000, 12);
        let z = q.integrate(raw);
        assert!((raw_integral() - z).abs() < 1e-14);
        assert!((raw_integral() - 0.443_993_816_168_079_4).abs() < 1e-13);
    }

    #[test]
    fn step_values() {
        assert_eq!(step(0.0), 0.5);
        assert_eq!(step(10.0), 1.0);
        assert_eq!(step(-3.0), 0.0);
        let q = Composite::new(-1.0, -0.3, 2000, 10);
        let want = q.integrate(|t| psi(0, t));
        assert!((step(-0.3) - want).abs() < 1e-14);
        assert!((step(0.3) + step(-0.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for k in 0..6u32 {
            for &t in &[-0.7, -0.2, 0.1, 0.55] {
                let h = 1e-5;
                let fd = (psi(k, t + h) - psi(k, t - h)) / (2.0 * h);
                let d = psi(k + 1, t);
                assert!((fd - d).abs() < 1e-6 * (1.0 + d.abs()), "k={k} t={t}: {fd} vs {d}");
            }
        }
    }

    #[test]
    fn bump_is_scaled_psi() {
        for &t in &[-0.9, 0.0, 0.4] {
            assert!((bump(t) - bump_factor() * psi(0, t)).abs() < 1e-15);
        }
        assert_eq!(bump(0.0), 1.0);
    }
}
