use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;

use crate::expr::{Expr, Node};
use crate::template;
use crate::EvalError;

/// Modulus below which a denominator counts as zero.
pub const GUARD_ZERO: f64 = 1e-300;

pub(crate) fn rational_to_f64(p: &Rational64) -> f64 {
    *p.numer() as f64 / *p.denom() as f64
}

fn guard_err(e: &Expr) -> EvalError {
    let mut s = e.to_string();
    if s.len() > 80 {
        let cut = (0..=77).rev().find(|&i| s.is_char_boundary(i)).unwrap_or(0);
        s.truncate(cut);
        s.push_str("...");
    }
    EvalError::Guard { node: s }
}

struct Ctx<'a> {
    x: &'a [f64],
    eps: f64,
    memo: HashMap<*const Node, Complex64>,
}

impl Expr {
    /// Value at `(x, eps)`.
    pub fn eval(&self, x: &[f64], eps: f64) -> Result<Complex64, EvalError> {
        let mut ctx = Ctx { x, eps, memo: HashMap::new() };
        ctx.eval(self)
    }

    /// Real part of [`Expr::eval`], for arguments of template atoms.
    pub fn eval_re(&self, x: &[f64], eps: f64) -> Result<f64, EvalError> {
        Ok(self.eval(x, eps)?.re)
    }
}

impl Ctx<'_> {
    fn eval(&mut self, e: &Expr) -> Result<Complex64, EvalError> {
        // only subtrees referenced more than once are worth remembering
        let shared = Arc::strong_count(&e.0) > 1;
        if shared {
            if let Some(v) = self.memo.get(&e.ptr()) {
                return Ok(*v);
            }
        }
        let v = self.compute(e)?;
        if shared {
            self.memo.insert(e.ptr(), v);
        }
        Ok(v)
    }

    fn coord(&self, i: usize) -> Result<f64, EvalError> {
        self.x.get(i).copied().ok_or(EvalError::Dimension { index: i, len: self.x.len() })
    }

    fn compute(&mut self, e: &Expr) -> Result<Complex64, EvalError> {
        let re = |v: f64| Complex64::new(v, 0.0);
        Ok(match e.node() {
            Node::Var(i) => re(self.coord(*i)?),
            Node::Const(z) => *z,
            Node::EpsPow(p) => re(self.eps.powf(rational_to_f64(p))),
            Node::LogInv => re((1.0 / self.eps).ln()),
            Node::Net(n) => n
                .net
                .at(self.eps)
                .ok_or_else(|| EvalError::OffGrid { name: n.name.clone(), eps: self.eps })?,
            Node::Sum(v) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for t in v {
                    acc += self.eval(t)?;
                }
                acc
            }
            Node::Product(v) => {
                let mut acc = Complex64::new(1.0, 0.0);
                for t in v {
                    acc *= self.eval(t)?;
                    if acc == Complex64::new(0.0, 0.0) {
                        // outside a compact support the remaining factors are never evaluated
                        break;
                    }
                }
                acc
            }
            Node::Pow(b, k) => {
                let z = self.eval(b)?;
                if *k < 0 && z.norm() < GUARD_ZERO {
                    return Err(guard_err(e));
                }
                z.powi(*k)
            }
            Node::Recip(b, guard) => {
                if let Some(g) = guard {
                    if !g.contains(self.x) {
                        return Err(guard_err(e));
                    }
                }
                let z = self.eval(b)?;
                if z.norm() < GUARD_ZERO {
                    return Err(guard_err(e));
                }
                z.inv()
            }
            Node::Sin(b) => self.eval(b)?.sin(),
            Node::Cos(b) => self.eval(b)?.cos(),
            Node::Exp(b) => self.eval(b)?.exp(),
            Node::Subst { var, scale, shift, body } => {
                let s = self.eval(scale)?.re;
                let t = self.eval(shift)?.re;
                let mut y = self.x.to_vec();
                let xi = self.coord(*var)?;
                y[*var] = s * xi + t;
                let mut inner = Ctx { x: &y, eps: self.eps, memo: HashMap::new() };
                inner.eval(body)?
            }
            Node::Bump { var, center, radius } => re(template::bump((self.coord(*var)? - center) / radius)),
            Node::Hstep { var, width } => {
                let w = self.eval(width)?.re;
                if !(w.abs() >= GUARD_ZERO) {
                    return Err(guard_err(e));
                }
                re(template::step(self.coord(*var)? / w))
            }
            Node::Psi { order, arg } => re(template::psi(*order, self.eval(arg)?.re)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Guard;

    #[test]
    fn atoms() {
        use num_rational::Rational64;
        let e = Expr::eps_pow(Rational64::from_integer(2));
        assert_eq!(e.eval(&[0.0], 0.5).unwrap(), Complex64::new(0.25, 0.0));
        let h = Expr::hstep(0, Expr::one());
        assert!((h.eval(&[10.0], 0.3).unwrap().re - 1.0).abs() < 1e-12);
        assert_eq!(h.eval(&[0.0], 0.3).unwrap().re, 0.5);
    }

    #[test]
    fn guards_name_the_node() {
        let x = Expr::var(0);
        let r = x.recip();
        assert!(matches!(r.eval(&[0.0], 0.5), Err(EvalError::Guard { .. })));
        let g = x.add_const(2.0).recip_guarded(Guard { lo: vec![-1.0], hi: vec![1.0] });
        assert!(g.eval(&[0.5], 0.5).is_ok());
        match g.eval(&[1.5], 0.5) {
            Err(EvalError::Guard { node }) => assert!(node.contains("x1")),
            other => panic!("{other:?}"),
        }
        assert!(matches!(x.eval(&[], 0.5), Err(EvalError::Dimension { index: 0, len: 0 })));
    }
}
