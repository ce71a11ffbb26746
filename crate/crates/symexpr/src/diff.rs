use std::collections::HashMap;

use num_complex::Complex64;

use crate::expr::{Expr, Node};
use crate::template;

impl Expr {
    /// Exact partial derivative in the zero-based variable `i`.
    pub fn diff(&self, i: usize) -> Expr {
        let mut memo = HashMap::new();
        d(self, i, &mut memo)
    }

    /// `∂^alpha` for a multi-index given per variable.
    pub fn diff_multi(&self, alpha: &[u32]) -> Expr {
        let mut e = self.clone();
        for (i, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                e = e.diff(i);
            }
        }
        e
    }
}

fn d(e: &Expr, i: usize, memo: &mut HashMap<*const Node, Expr>) -> Expr {
    if let Some(v) = memo.get(&e.ptr()) {
        return v.clone();
    }
    let out = match e.node() {
        Node::Var(j) => {
            if *j == i {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Node::Const(_) | Node::EpsPow(_) | Node::LogInv | Node::Net(_) => Expr::zero(),
        Node::Sum(v) => Expr::add(v.iter().map(|t| d(t, i, memo)).collect()),
        Node::Product(v) => {
            let mut terms = Vec::new();
            for k in 0..v.len() {
                let dk = d(&v[k], i, memo);
                if dk.is_zero() {
                    continue;
                }
                let mut f = v.clone();
                f[k] = dk;
                terms.push(Expr::mul(f));
            }
            Expr::add(terms)
        }
        Node::Pow(b, k) => {
            let db = d(b, i, memo);
            if db.is_zero() {
                Expr::zero()
            } else {
                Expr::mul(vec![Expr::real(*k as f64), b.pow(k - 1), db])
            }
        }
        Node::Recip(b, _) => {
            let db = d(b, i, memo);
            if db.is_zero() {
                Expr::zero()
            } else {
                Expr::mul(vec![Expr::real(-1.0), db, e.clone(), e.clone()])
            }
        }
        Node::Sin(b) => chain(d(b, i, memo), || b.cos()),
        Node::Cos(b) => chain(d(b, i, memo), || b.sin().neg()),
        Node::Exp(b) => chain(d(b, i, memo), || e.clone()),
        Node::Subst { var, scale, shift, body } => {
            let inner = Expr::subst(*var, scale.clone(), shift.clone(), d(body, i, memo));
            if *var == i {
                Expr::mul(vec![scale.clone(), inner])
            } else {
                inner
            }
        }
        Node::Bump { var, center, radius } => {
            if *var != i {
                Expr::zero()
            } else {
                let arg = Expr::add(vec![Expr::var(*var).scale(re(1.0 / radius)), Expr::real(-center / radius)]);
                Expr::mul(vec![Expr::real(template::bump_factor() / radius), Expr::psi(1, arg)])
            }
        }
        Node::Hstep { var, width } => {
            if *var != i {
                Expr::zero()
            } else {
                let inv = width.recip();
                let arg = Expr::mul(vec![Expr::var(*var), inv.clone()]);
                Expr::mul(vec![inv, Expr::psi(0, arg)])
            }
        }
        Node::Psi { order, arg } => chain(d(arg, i, memo), || Expr::psi(order + 1, arg.clone())),
    };
    memo.insert(e.ptr(), out.clone());
    out
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn chain(inner: Expr, outer: impl FnOnce() -> Expr) -> Expr {
    if inner.is_zero() {
        Expr::zero()
    } else {
        Expr::mul(vec![outer(), inner])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_rule() {
        let x = Expr::var(0);
        let e = x.pow(2);
        assert_eq!(e.diff(0), Expr::mul(vec![Expr::real(2.0), x.clone()]));
        assert!(e.diff(1).is_zero());
    }

    #[test]
    fn hstep_derivative_is_scaled_template() {
        let w = Expr::loginv().pow(-1);
        let h = Expr::hstep(0, w.clone());
        let dh = h.diff(0);
        for &(x, eps) in &[(0.0, 0.01), (0.05, 0.001), (-0.1, 1e-5)] {
            let wv = (1.0f64 / eps).ln().recip();
            let want = template::psi(0, x / wv) / wv;
            let got = dh.eval(&[x], eps).unwrap().re;
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
        }
    }
}
