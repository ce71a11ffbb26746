use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use symbols::{MultiIndex, SymbolFamily};
use symexpr::Expr;

use crate::rational::{Base, Handle, RationalSymbol, FAMILY_DIFFERENCE, FAMILY_Q_REFLECTED};
use crate::AdjointError;

pub const MAX_ITERATIONS: usize = 6;
pub const NODE_BUDGET: usize = 4_000_000;

/// Box of base points and least `|xi|` where `P` is asserted not to vanish.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GuardRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub min_radius: f64,
}

impl GuardRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, min_radius: f64) -> Self {
        GuardRegion { lo, hi, min_radius }
    }

    pub fn contains(&self, x: &[f64], xi: &[f64]) -> bool {
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        r >= self.min_radius && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a <= v && v <= b)
    }
}

/// `R(xi; x, D) w = -sum_beta r_beta(x, xi) D_x^beta w`, built from `A = P`, `Q = ᵗP`.
#[derive(Clone, Debug)]
pub struct RemainderOperator {
    pub base: Arc<Base>,
    pub guard: GuardRegion,
    /// nonzero `r_beta` only
    pub coeffs: BTreeMap<MultiIndex, RationalSymbol>,
}

impl RemainderOperator {
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, beta: &[u32]) -> Option<&RationalSymbol> {
        self.coeffs.get(&MultiIndex(beta.to_vec()))
    }

    pub fn symbol(&self) -> &SymbolFamily {
        self.base.a()
    }
}

fn sign(k: u32) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn build_remainder(p: &SymbolFamily, guard: GuardRegion) -> Result<RemainderOperator, AdjointError> {
    let n = p.dim();
    if guard.lo.len() != n || guard.hi.len() != n {
        return Err(AdjointError::Dimension(format!("guard box of dimension {} for n = {n}", guard.lo.len())));
    }
    let base = Base::new(p);
    let m = p.degree();
    let zero = MultiIndex::zero(n);
    let inv_a = RationalSymbol::recip_a(&base);
    // D_x^gamma (1/A) for |gamma| <= m
    let mut d_inv: BTreeMap<MultiIndex, RationalSymbol> = BTreeMap::new();
    for g in MultiIndex::up_to(n, m) {
        d_inv.insert(g.clone(), inv_a.d_x(&g));
    }
    // ∂_xi^gamma Q(x, -xi) = (-1)^|gamma| ∂_xi^gamma [Q(x, -xi) as a symbol in xi]
    let dq = |g: &MultiIndex| {
        RationalSymbol::handle(&base, Handle { family: FAMILY_Q_REFLECTED, dx: zero.clone(), dxi: g.clone() })
            .scale(Complex64::new(sign(g.order()), 0.0))
    };
    let mut coeffs = BTreeMap::new();
    let diff = RationalSymbol::handle(&base, Handle { family: FAMILY_DIFFERENCE, dx: zero.clone(), dxi: zero.clone() });
    let mut r0 = diff.mul(&inv_a);
    for g in MultiIndex::up_to(n, m) {
        if g.order() == 0 {
            continue;
        }
        let t = dq(&g).mul(&d_inv[&g]).scale(Complex64::new(1.0 / g.factorial(), 0.0));
        r0 = r0.add(&t);
    }
    if !r0.is_zero() {
        coeffs.insert(zero.clone(), r0);
    }
    for b in MultiIndex::up_to(n, m) {
        if b.order() == 0 {
            continue;
        }
        let mut rb = RationalSymbol::zero(&base);
        for g in MultiIndex::up_to(n, m - b.order()) {
            let k = 1.0 / (b.factorial() * g.factorial());
            rb = rb.add(&dq(&b.plus(&g)).mul(&d_inv[&g]).scale(Complex64::new(k, 0.0)));
        }
        if !rb.is_zero() {
            coeffs.insert(b, rb);
        }
    }
    Ok(RemainderOperator { base, guard, coeffs })
}

/// `R g = -sum r_beta D_x^beta g`
pub fn apply_remainder(r: &RemainderOperator, g: &RationalSymbol) -> RationalSymbol {
    let mut out = RationalSymbol::zero(&r.base);
    for (beta, rb) in &r.coeffs {
        let dg = g.d_x(beta);
        if dg.is_zero() {
            continue;
        }
        out = out.sub(&rb.mul(&dg));
    }
    out
}

/// `w = sum_{k<N} R^k phi`, `psi = w / P`, `residual = R^N phi`.
#[derive(Clone, Debug)]
pub struct AdjointSolution {
    pub n_iter: usize,
    pub phi: Expr,
    pub remainder: RemainderOperator,
    /// `R^k phi` for `k = 0..=N`
    pub powers: Vec<RationalSymbol>,
    pub w: RationalSymbol,
    pub psi: RationalSymbol,
    pub residual: RationalSymbol,
}

pub fn build_adjoint_solution(
    p: &SymbolFamily,
    phi: &Expr,
    n_iter: usize,
    guard: GuardRegion,
) -> Result<AdjointSolution, AdjointError> {
    let r = build_remainder(p, guard)?;
    solution_from(r, phi, n_iter)
}

pub fn solution_from(r: RemainderOperator, phi: &Expr, n_iter: usize) -> Result<AdjointSolution, AdjointError> {
    if n_iter == 0 || n_iter > MAX_ITERATIONS {
        return Err(AdjointError::Iterations { n: n_iter, max: MAX_ITERATIONS });
    }
    let base = r.base.clone();
    let mut powers = vec![RationalSymbol::from_expr(&base, phi.clone())];
    for _ in 0..n_iter {
        let next = apply_remainder(&r, powers.last().expect("non-empty"));
        let nodes = next.node_count();
        if nodes > NODE_BUDGET {
            return Err(AdjointError::Budget { nodes, limit: NODE_BUDGET });
        }
        powers.push(next);
    }
    let mut w = RationalSymbol::zero(&base);
    for k in &powers[..n_iter] {
        w = w.add(k);
    }
    let psi = w.mul(&RationalSymbol::recip_a(&base));
    let residual = powers[n_iter].clone();
    Ok(AdjointSolution { n_iter, phi: phi.clone(), remainder: r, powers, w, psi, residual })
}

/// Largest `|LHS - RHS| / (1 + |RHS|)` with `LHS = e^{i xi x} ᵗP(x, D)(psi e^{-i xi x})`
/// (by symbolic differentiation of the materialized `psi`) and `RHS = phi - R^N phi`.
pub fn verify_adjoint_identity(sol: &AdjointSolution, samples: &[(Vec<f64>, Vec<f64>, f64)]) -> Result<f64, AdjointError> {
    let tp = sol.remainder.symbol().transpose();
    let mut by_xi: BTreeMap<Vec<u64>, Expr> = BTreeMap::new();
    let mut worst = 0.0f64;
    for (x, xi, eps) in samples {
        if !sol.remainder.guard.contains(x, xi) {
            return Err(AdjointError::Guard { x: x.clone(), xi: xi.clone(), eps: *eps });
        }
        let key: Vec<u64> = xi.iter().map(|v| v.to_bits()).collect();
        let lhs_expr = by_xi.entry(key).or_insert_with(|| tp.apply_to_modulated(&sol.psi.materialize(xi), xi));
        let lhs = lhs_expr.eval(x, *eps).map_err(|e| AdjointError::from_eval(e, x, xi, *eps))?;
        let rhs = sol.phi.eval(x, *eps)? - sol.residual.eval(x, xi, *eps)?;
        worst = worst.max((lhs - rhs).norm() / (1.0 + rhs.norm()));
    }
    Ok(worst)
}
