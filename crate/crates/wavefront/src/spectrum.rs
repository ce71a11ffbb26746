use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;
use symexpr::Expr;

use crate::cache::SpectrumCache;
use crate::sampled::{SampledNetFunction, WindowSpec};
use crate::WaveError;

/// `(phi u_eps)^(xi) ≈ dx Σ_j u(x_j) phi(x_j) e^{-i xi x_j}` at `xi_k = 2πk / (G dx)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    /// ascending, `k = -G/2 .. G/2 - 1`
    pub xi: Vec<f64>,
    pub eps: Vec<f64>,
    pub values: Vec<Vec<Complex64>>,
    /// `sup_j |u(x_j)| · dx Σ_j phi(x_j)` per eps, the size of an unstructured `phi u`
    pub scale: Vec<f64>,
    pub dx: f64,
    pub nyquist: f64,
}

impl Spectrum {
    pub fn dxi(&self) -> f64 {
        self.xi[1] - self.xi[0]
    }
}

pub(crate) fn transform(samples: &[Complex64], window: &[f64], lo: f64, dx: f64) -> Vec<Complex64> {
    let g = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().zip(window).map(|(u, w)| u * w).collect();
    FftPlanner::new().plan_fft_forward(g).process(&mut buf);
    let half = g / 2;
    (0..g)
        .map(|i| {
            // ascending order: index i holds k = i - G/2
            let k = i as i64 - half as i64;
            let idx = k.rem_euclid(g as i64) as usize;
            let xi = 2.0 * PI * k as f64 / (g as f64 * dx);
            buf[idx] * Complex64::new(0.0, -xi * lo).exp() * dx
        })
        .collect()
}

pub(crate) fn frequencies(g: usize, dx: f64) -> Vec<f64> {
    let half = g as i64 / 2;
    (0..g as i64).map(|i| 2.0 * PI * (i - half) as f64 / (g as f64 * dx)).collect()
}

fn window_values(w: &WindowSpec, xs: &[f64]) -> Result<Vec<f64>, WaveError> {
    xs.iter().map(|&x| Ok(w.phi.eval(&[x], 0.5)?.re)).collect()
}

pub fn windowed_fft(u: &SampledNetFunction, w: &WindowSpec) -> Result<Spectrum, WaveError> {
    if w.lo() < u.lo || w.hi() > u.hi {
        return Err(WaveError::Window(format!(
            "support [{}, {}] outside the sampled box [{}, {}]",
            w.lo(),
            w.hi(),
            u.lo,
            u.hi
        )));
    }
    let dx = u.dx();
    let xs = SampledNetFunction::xs(u.lo, u.hi, u.points);
    let win = window_values(w, &xs)?;
    let values = u.samples.par_iter().map(|s| transform(s, &win, u.lo, dx)).collect();
    let mass = win.iter().sum::<f64>() * dx;
    let scale = u.samples.iter().map(|s| s.iter().map(|v| v.norm()).fold(0.0, f64::max) * mass).collect();
    Ok(Spectrum { xi: frequencies(u.points, dx), eps: u.eps.clone(), values, scale, dx, nyquist: PI / dx })
}

/// Spectra on the window's own box, read from or written to the cache per eps.
pub(crate) fn window_spectrum(
    source: &Expr,
    w: &WindowSpec,
    points: usize,
    eps: &[f64],
    cache: Option<(&SpectrumCache, &str)>,
) -> Result<Spectrum, WaveError> {
    let (lo, hi) = (w.lo(), w.hi());
    let dx = (hi - lo) / points as f64;
    let key = |e: f64| {
        format!("{}|{}|{:e}|{:e}|{points}|{:x}|center={:e}|radius={:e}", cache.map_or("", |c| c.1), source, lo, hi, e.to_bits(), w.center, w.radius)
    };
    let mut values: Vec<Option<Vec<Complex64>>> = match cache {
        // the scale rides along as one trailing value
        Some((c, _)) => eps.iter().map(|&e| c.get(&key(e), points + 1)).collect(),
        None => vec![None; eps.len()],
    };
    let missing: Vec<f64> = eps.iter().zip(&values).filter(|(_, v)| v.is_none()).map(|(&e, _)| e).collect();
    if !missing.is_empty() {
        let u = SampledNetFunction::sample(source, lo, hi, points, &missing)?;
        let s = windowed_fft(&u, w)?;
        let mut fresh = s.values.into_iter().zip(s.scale);
        for (e, slot) in eps.iter().zip(values.iter_mut()) {
            if slot.is_none() {
                let (mut v, scale) = fresh.next().expect("one spectrum per missing eps");
                v.push(Complex64::new(scale, 0.0));
                if let Some((c, _)) = cache {
                    c.put(&key(*e), &v)?;
                }
                *slot = Some(v);
            }
        }
    }
    let mut scale = Vec::with_capacity(eps.len());
    let values = values
        .into_iter()
        .map(|v| {
            let mut v = v.expect("filled");
            scale.push(v.pop().expect("trailing scale").re);
            v
        })
        .collect();
    Ok(Spectrum {
        xi: frequencies(points, dx),
        eps: eps.to_vec(),
        values,
        scale,
        dx,
        nyquist: PI / dx,
    })
}
