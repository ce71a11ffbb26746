//! Symbols used throughout the test suites and as CLI built-ins.

use std::sync::Arc;

use epsnet::{EpsGrid, EpsNet};
use num_complex::Complex64;
use symexpr::{parse, parse_with_nets, Expr, NamedNet, NetTable};

use crate::SymbolFamily;

fn p(src: &str, n: usize) -> Expr {
    parse(src, n).expect("static DSL text")
}

fn terms(n: usize, t: Vec<(Vec<u32>, Expr)>) -> SymbolFamily {
    SymbolFamily::from_terms(n, t).expect("static symbol")
}

/// Net taking `on` where `1/eps` is an integer and `off` elsewhere.
pub fn resonance_net(name: &str, grid: &EpsGrid, on: Complex64, off: Complex64) -> Arc<NamedNet> {
    let net = EpsNet::from_fn(grid, |e| if EpsGrid::is_resonant(e) { on } else { off }).expect("finite values");
    Arc::new(NamedNet { name: name.to_string(), net })
}

/// `xi^2 + 1`
pub fn elliptic1d() -> SymbolFamily {
    terms(1, vec![(vec![2], Expr::one()), (vec![0], Expr::one())])
}

/// `i tau + xi^2` in variables `(x, t)`.
pub fn heat2d() -> SymbolFamily {
    terms(2, vec![(vec![2, 0], Expr::one()), (vec![0, 1], Expr::imag_unit())])
}

/// `-tau^2 + c^2 xi^2 - i c^2 (rho'/rho) xi` in variables `(x, t)`, coefficients in `x1` only.
pub fn acoustic_from(c: &Expr, rho: &Expr) -> SymbolFamily {
    let c2 = c.pow(2);
    let b = Expr::mul(vec![c2.clone(), rho.diff(0), rho.recip()]);
    terms(
        2,
        vec![
            (vec![0, 2], Expr::real(-1.0)),
            (vec![2, 0], c2),
            (vec![1, 0], b.scale(Complex64::new(0.0, -1.0))),
        ],
    )
}

/// Sound speed with a slow-scale regularized jump from 1 to 2 at `x = 0`.
pub fn acoustic_speed() -> Expr {
    p("1 + hstep(x1; 0.5 + 0.5 * loginv^-1)", 2)
}

/// Density with a slow-scale regularized jump from 2 to 3 at `x = 0`.
pub fn acoustic_density() -> Expr {
    p("2 + hstep(x1; 2 + loginv^-1)", 2)
}

pub fn acoustic() -> SymbolFamily {
    acoustic_from(&acoustic_speed(), &acoustic_density())
}

/// Acoustic operator with smooth, eps-independent coefficients.
pub fn acoustic_smooth() -> SymbolFamily {
    acoustic_from(&p("1.5 + 0.5 * sin(x1)", 2), &p("2 + cos(x1)", 2))
}

/// `c_eps xi` with the zero divisor `c_eps = 0` on `1/eps ∈ N`, `i` elsewhere.
pub fn remark_i(grid: &EpsGrid) -> (SymbolFamily, NetTable) {
    let mut nets = NetTable::new();
    nets.insert("c".into(), resonance_net("c", grid, Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0)));
    let c = parse_with_nets("$c", 1, &nets).expect("static DSL text");
    (terms(1, vec![(vec![1], c)]), nets)
}

/// `a_eps xi + b_eps` with `a_eps = 0` on `1/eps ∈ N`, 1 elsewhere, and `b = 1 - a`.
pub fn remark_ii(grid: &EpsGrid) -> (SymbolFamily, NetTable) {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut nets = NetTable::new();
    nets.insert("a".into(), resonance_net("a", grid, zero, one));
    nets.insert("b".into(), resonance_net("b", grid, one, zero));
    let a = parse_with_nets("$a", 1, &nets).expect("static DSL text");
    let b = parse_with_nets("$b", 1, &nets).expect("static DSL text");
    (terms(1, vec![(vec![1], a), (vec![0], b)]), nets)
}

/// `eps xi + i`
pub fn remark_iii() -> SymbolFamily {
    terms(1, vec![(vec![1], p("eps", 1)), (vec![0], Expr::imag_unit())])
}

/// `(1 + hstep(x; 1/log(1/eps))) xi + 1`
pub fn first_order_demo() -> SymbolFamily {
    terms(1, vec![(vec![1], p("1 + hstep(x1; loginv^-1)", 1)), (vec![0], Expr::one())])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_coefficient_acoustic_is_characteristic_on_the_diagonal() {
        let s = acoustic_from(&Expr::one(), &Expr::one());
        assert_eq!(s.eval(&[0.3, 0.0], &[1.0, 1.0], 0.5).unwrap(), Complex64::new(0.0, 0.0));
        let pp = acoustic().principal_part();
        assert_eq!(pp.coeffs().len(), 2);
    }
}
