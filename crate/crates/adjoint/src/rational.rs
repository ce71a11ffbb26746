use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use symbols::{minus_i_pow, MultiIndex, SymbolFamily};
use symexpr::{Expr, GUARD_ZERO};

use crate::AdjointError;

/// Base symbols a [`RationalSymbol`] refers to, with a cache of their derivatives.
///
/// Family 0 is `A = P`, family 1 is `Q(x, -xi)` for `Q = ᵗP`, family 2 is
/// their difference `Q(x, -xi) - A(x, xi)`.
#[derive(Debug)]
pub struct Base {
    pub(crate) families: Vec<SymbolFamily>,
    cache: Mutex<BTreeMap<Handle, Option<Arc<SymbolFamily>>>>,
}

pub const FAMILY_A: usize = 0;
pub const FAMILY_Q_REFLECTED: usize = 1;
pub const FAMILY_DIFFERENCE: usize = 2;

impl Base {
    pub fn new(p: &SymbolFamily) -> Arc<Base> {
        let qr = p.transpose().reflect();
        let diff = &qr + &p.scale(Complex64::new(-1.0, 0.0));
        Arc::new(Base { families: vec![p.clone(), qr, diff], cache: Mutex::new(BTreeMap::new()) })
    }

    pub fn dim(&self) -> usize {
        self.families[FAMILY_A].dim()
    }

    pub fn a(&self) -> &SymbolFamily {
        &self.families[FAMILY_A]
    }

    /// `∂_x^dx ∂_xi^dxi F`, or `None` when it vanishes.
    pub(crate) fn family(&self, h: &Handle) -> Option<Arc<SymbolFamily>> {
        let mut cache = self.cache.lock().expect("cache lock");
        cache
            .entry(h.clone())
            .or_insert_with(|| {
                let d = self.families[h.family].deriv(&h.dx, &h.dxi);
                (!d.is_zero()).then(|| Arc::new(d))
            })
            .clone()
    }
}

/// `∂_x^dx ∂_xi^dxi F_family`, evaluated at `(x, xi)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Handle {
    pub family: usize,
    pub dx: MultiIndex,
    pub dxi: MultiIndex,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Default)]
struct Monomial {
    factors: BTreeMap<Handle, u32>,
    /// power of `1/A`
    recip: u32,
}

impl Monomial {
    fn times(&self, o: &Monomial, a: &Handle) -> Monomial {
        let mut f = self.factors.clone();
        for (h, e) in &o.factors {
            *f.entry(h.clone()).or_insert(0) += e;
        }
        let mut m = Monomial { factors: f, recip: self.recip + o.recip };
        m.cancel(a);
        m
    }

    fn cancel(&mut self, a: &Handle) {
        if let Some(e) = self.factors.get_mut(a) {
            let c = (*e).min(self.recip);
            *e -= c;
            self.recip -= c;
            if *e == 0 {
                self.factors.remove(a);
            }
        }
    }
}

/// Finite sums `c(x) · Π handles^e · A^{-k}` with expression coefficients `c`.
///
/// Functions of `x` and `xi` that are rational in `xi`; closed under `∂_x` and `∂_xi`.
#[derive(Clone, Debug)]
pub struct RationalSymbol {
    base: Arc<Base>,
    terms: BTreeMap<Monomial, Expr>,
}

impl PartialEq for RationalSymbol {
    fn eq(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.base, &o.base) && self.terms == o.terms
    }
}

fn a_handle(n: usize) -> Handle {
    Handle { family: FAMILY_A, dx: MultiIndex::zero(n), dxi: MultiIndex::zero(n) }
}

impl RationalSymbol {
    pub fn zero(base: &Arc<Base>) -> Self {
        RationalSymbol { base: base.clone(), terms: BTreeMap::new() }
    }

    pub fn from_expr(base: &Arc<Base>, e: Expr) -> Self {
        let mut s = Self::zero(base);
        s.insert(Monomial::default(), e);
        s
    }

    /// `1 / A`
    pub fn recip_a(base: &Arc<Base>) -> Self {
        let mut s = Self::zero(base);
        s.insert(Monomial { factors: BTreeMap::new(), recip: 1 }, Expr::one());
        s
    }

    /// A derivative of a base family; x-free-in-xi derivatives fold into the coefficient.
    pub fn handle(base: &Arc<Base>, h: Handle) -> Self {
        let mut s = Self::zero(base);
        let mut m = Monomial::default();
        if let Some(c) = s.push_handle(&mut m, &h, 1) {
            s.insert(m, c);
        }
        s
    }

    pub fn base(&self) -> &Arc<Base> {
        &self.base
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Expression nodes over all coefficients plus one per factor.
    pub fn node_count(&self) -> usize {
        self.terms.iter().map(|(m, c)| c.node_count() + m.factors.len() + 1).sum()
    }

    /// Multiplies `h^e` into `m`; returns the coefficient factor, or `None` if `h` vanishes.
    fn push_handle(&self, m: &mut Monomial, h: &Handle, e: u32) -> Option<Expr> {
        let fam = self.base.family(h)?;
        if fam.degree() == 0 {
            let c = fam.coeff(&MultiIndex::zero(fam.dim())).cloned().unwrap_or_else(Expr::zero);
            return Some(c.pow(e as i32));
        }
        *m.factors.entry(h.clone()).or_insert(0) += e;
        m.cancel(&a_handle(self.base.dim()));
        Some(Expr::one())
    }

    fn insert(&mut self, m: Monomial, c: Expr) {
        if c.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&m) {
            Some(prev) => Expr::add(vec![prev, c]),
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(m, merged);
        }
    }

    fn same_base(&self, o: &RationalSymbol) {
        assert!(Arc::ptr_eq(&self.base, &o.base), "rational symbols over different base symbols");
    }

    pub fn add(&self, o: &RationalSymbol) -> RationalSymbol {
        self.same_base(o);
        let mut s = self.clone();
        for (m, c) in &o.terms {
            s.insert(m.clone(), c.clone());
        }
        s
    }

    pub fn sub(&self, o: &RationalSymbol) -> RationalSymbol {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, k: Complex64) -> RationalSymbol {
        let mut s = Self::zero(&self.base);
        if k == Complex64::new(0.0, 0.0) {
            return s;
        }
        for (m, c) in &self.terms {
            s.insert(m.clone(), c.scale(k));
        }
        s
    }

    pub fn mul(&self, o: &RationalSymbol) -> RationalSymbol {
        self.same_base(o);
        let a = a_handle(self.base.dim());
        let mut s = Self::zero(&self.base);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                s.insert(m1.times(m2, &a), Expr::mul(vec![c1.clone(), c2.clone()]));
            }
        }
        s
    }

    pub fn mul_expr(&self, e: &Expr) -> RationalSymbol {
        let mut s = Self::zero(&self.base);
        for (m, c) in &self.terms {
            s.insert(m.clone(), Expr::mul(vec![c.clone(), e.clone()]));
        }
        s
    }

    /// Product rule over the coefficient, the handles and the power of `1/A`.
    fn derive(&self, bump: impl Fn(&Handle) -> Handle, coeff: impl Fn(&Expr) -> Expr, a_deriv: &Handle) -> RationalSymbol {
        let mut s = Self::zero(&self.base);
        for (m, c) in &self.terms {
            let dc = coeff(c);
            if !dc.is_zero() {
                s.insert(m.clone(), dc);
            }
            for (h, &e) in &m.factors {
                let mut rest = m.clone();
                let left = rest.factors.get_mut(h).expect("factor present");
                *left -= 1;
                if *left == 0 {
                    rest.factors.remove(h);
                }
                if let Some(f) = s.push_handle(&mut rest, &bump(h), 1) {
                    s.insert(rest, Expr::mul(vec![c.scale(Complex64::new(e as f64, 0.0)), f]));
                }
            }
            if m.recip > 0 {
                let mut rest = m.clone();
                rest.recip += 1;
                if let Some(f) = s.push_handle(&mut rest, a_deriv, 1) {
                    s.insert(rest, Expr::mul(vec![c.scale(Complex64::new(-(m.recip as f64), 0.0)), f]));
                }
            }
        }
        s
    }

    pub fn diff_x(&self, i: usize) -> RationalSymbol {
        let n = self.base.dim();
        let e = MultiIndex::unit(n, i);
        let ad = Handle { family: FAMILY_A, dx: e.clone(), dxi: MultiIndex::zero(n) };
        self.derive(|h| Handle { family: h.family, dx: h.dx.plus(&e), dxi: h.dxi.clone() }, |c| c.diff(i), &ad)
    }

    pub fn diff_xi(&self, i: usize) -> RationalSymbol {
        let n = self.base.dim();
        let e = MultiIndex::unit(n, i);
        let ad = Handle { family: FAMILY_A, dx: MultiIndex::zero(n), dxi: e.clone() };
        self.derive(|h| Handle { family: h.family, dx: h.dx.clone(), dxi: h.dxi.plus(&e) }, |_| Expr::zero(), &ad)
    }

    pub fn diff_x_multi(&self, alpha: &MultiIndex) -> RationalSymbol {
        let mut s = self.clone();
        for (i, &k) in alpha.0.iter().enumerate() {
            for _ in 0..k {
                s = s.diff_x(i);
            }
        }
        s
    }

    /// `D_x^alpha = (-i ∂_x)^alpha`
    pub fn d_x(&self, alpha: &MultiIndex) -> RationalSymbol {
        self.diff_x_multi(alpha).scale(minus_i_pow(alpha.order()))
    }

    /// Value at `(x, xi, eps)`; a guard error where `|A| <= GUARD_ZERO` and `1/A` occurs.
    pub fn eval(&self, x: &[f64], xi: &[f64], eps: f64) -> Result<Complex64, AdjointError> {
        let mut handle_vals: BTreeMap<&Handle, Complex64> = BTreeMap::new();
        let needs_recip = self.terms.keys().any(|m| m.recip > 0);
        let inv_a = if needs_recip {
            let a = self.base.a().eval(x, xi, eps)?;
            if a.norm() <= GUARD_ZERO {
                return Err(AdjointError::Guard { x: x.to_vec(), xi: xi.to_vec(), eps });
            }
            a.inv()
        } else {
            Complex64::new(0.0, 0.0)
        };
        let mut total = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut v = c.eval(x, eps)?;
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (h, &e) in &m.factors {
                let hv = match handle_vals.get(h) {
                    Some(v) => *v,
                    None => {
                        let fam = self.base.family(h).expect("stored handles do not vanish");
                        let hv = fam.eval(x, xi, eps)?;
                        handle_vals.insert(h, hv);
                        hv
                    }
                };
                v *= hv.powu(e);
            }
            if m.recip > 0 {
                v *= inv_a.powu(m.recip);
            }
            total += v;
        }
        Ok(total)
    }

    /// The function `x -> self(x, xi)` at a fixed `xi`, as an expression in `x` and `eps`.
    pub fn materialize(&self, xi: &[f64]) -> Expr {
        let a_inv = self.base.a().at_xi(xi).recip();
        let mut at: BTreeMap<&Handle, Expr> = BTreeMap::new();
        let mut terms = Vec::with_capacity(self.terms.len());
        for (m, c) in &self.terms {
            let mut f = vec![c.clone()];
            for (h, &e) in &m.factors {
                let hv = at
                    .entry(h)
                    .or_insert_with(|| self.base.family(h).expect("stored handles do not vanish").at_xi(xi))
                    .clone();
                f.push(hv.pow(e as i32));
            }
            if m.recip > 0 {
                f.push(a_inv.pow(m.recip as i32));
            }
            terms.push(Expr::mul(f));
        }
        Expr::add(terms)
    }

    /// Handles in use, for inspection.
    pub fn handles(&self) -> Vec<(Handle, u32, u32)> {
        self.terms.keys().flat_map(|m| m.factors.iter().map(move |(h, e)| (h.clone(), *e, m.recip))).collect()
    }

    /// Largest power of `1/A` in any term.
    pub fn max_recip(&self) -> u32 {
        self.terms.keys().map(|m| m.recip).max().unwrap_or(0)
    }
}
