//! Canonical DSL text. Guards are not printed, so printing then parsing
//! reproduces an expression exactly when it carries no guards.

use std::fmt;

use num_complex::Complex64;

use crate::expr::{Expr, Node};

fn number(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn is_negative(z: Complex64) -> bool {
    (z.im == 0.0 && z.re < 0.0) || (z.re == 0.0 && z.im < 0.0)
}

/// Constant as a term: `2`, `3 * i`, `(1 + 2 * i)`.
fn constant(z: Complex64) -> String {
    if z.im == 0.0 {
        number(z.re)
    } else if z.re == 0.0 {
        if z.im == 1.0 {
            "i".into()
        } else if z.im == -1.0 {
            "-i".into()
        } else {
            format!("{} * i", number(z.im))
        }
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        let im = z.im.abs();
        if im == 1.0 {
            format!("({} {sign} i)", number(z.re))
        } else {
            format!("({} {sign} {} * i)", number(z.re), number(im))
        }
    }
}

fn is_atom(e: &Expr) -> bool {
    match e.node() {
        Node::Const(z) => z.im == 0.0 && z.re >= 0.0,
        Node::Sum(_) | Node::Product(_) | Node::Pow(..) | Node::Recip(..) | Node::EpsPow(_) => false,
        _ => true,
    }
}

fn paren(e: &Expr) -> String {
    if is_atom(e) {
        e.to_string()
    } else {
        format!("({e})")
    }
}

/// Factor inside a product: sums need parentheses, everything else binds tighter.
fn factor(e: &Expr) -> String {
    match e.node() {
        Node::Sum(_) => format!("({e})"),
        Node::Const(z) if z.im != 0.0 && z.re != 0.0 => constant(*z),
        Node::Const(z) if is_negative(*z) => format!("({})", constant(*z)),
        _ => e.to_string(),
    }
}

fn product(f: &mut fmt::Formatter<'_>, v: &[Expr]) -> fmt::Result {
    let mut first = true;
    let mut rest = v;
    if let Some(z) = v[0].as_const() {
        rest = &v[1..];
        if z == Complex64::new(-1.0, 0.0) {
            write!(f, "-")?;
        } else {
            write!(f, "{}", constant(z))?;
            first = false;
        }
    }
    for t in rest {
        match t.node() {
            Node::Recip(b, _) => {
                if first {
                    write!(f, "1")?;
                }
                write!(f, " / {}", recip_operand(b))?;
            }
            _ => {
                if !first {
                    write!(f, " * ")?;
                }
                write!(f, "{}", factor(t))?;
            }
        }
        first = false;
    }
    Ok(())
}

fn recip_operand(b: &Expr) -> String {
    match b.node() {
        Node::Sum(_) | Node::Product(_) | Node::Recip(..) => format!("({b})"),
        Node::Const(z) if z.im != 0.0 || z.re < 0.0 => format!("({})", constant(*z)),
        _ => b.to_string(),
    }
}

fn leading_negative(e: &Expr) -> bool {
    match e.node() {
        Node::Const(z) => is_negative(*z),
        Node::Product(v) => v[0].as_const().is_some_and(is_negative),
        _ => false,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Const(z) => write!(f, "{}", constant(*z)),
            Node::EpsPow(p) => {
                if *p.denom() == 1 {
                    write!(f, "eps^{}", p.numer())
                } else {
                    write!(f, "eps^({}/{})", p.numer(), p.denom())
                }
            }
            Node::LogInv => write!(f, "loginv"),
            Node::Net(n) => write!(f, "${}", n.name),
            Node::Sum(v) => {
                write!(f, "{}", v[0])?;
                for t in &v[1..] {
                    if leading_negative(t) {
                        write!(f, " - {}", t.neg())?;
                    } else {
                        write!(f, " + {t}")?;
                    }
                }
                Ok(())
            }
            Node::Product(v) => product(f, v),
            Node::Pow(b, k) => write!(f, "{}^{}", paren(b), k),
            Node::Recip(b, _) => write!(f, "1 / {}", recip_operand(b)),
            Node::Sin(b) => write!(f, "sin({b})"),
            Node::Cos(b) => write!(f, "cos({b})"),
            Node::Exp(b) => write!(f, "exp({b})"),
            Node::Subst { var, scale, shift, body } => {
                write!(f, "subst(x{}; {scale}; {shift}; {body})", var + 1)
            }
            Node::Bump { var, center, radius } => {
                write!(f, "bump(x{}; {}; {})", var + 1, number(*center), number(*radius))
            }
            Node::Hstep { var, width } => write!(f, "hstep(x{}; {width})", var + 1),
            Node::Psi { order, arg } => write!(f, "psi({order}; {arg})"),
        }
    }
}
