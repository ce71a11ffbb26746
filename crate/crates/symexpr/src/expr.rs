use std::collections::{BTreeMap, HashMap};
use std::hash::{BuildHasherDefault, Hash, Hasher};
use std::fmt;
use std::sync::Arc;

use epsnet::EpsNet;
use num_complex::Complex64;
use num_rational::Rational64;

/// An x-independent net referenced by name; evaluated by grid lookup.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedNet {
    pub name: String,
    pub net: EpsNet,
}

pub type NetTable = BTreeMap<String, Arc<NamedNet>>;

/// Region where a reciprocal is declared nonvanishing.
#[derive(Clone, Debug, PartialEq)]
pub struct Guard {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Guard {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    /// zero-based spatial variable
    Var(usize),
    Const(Complex64),
    EpsPow(Rational64),
    LogInv,
    Net(Arc<NamedNet>),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Pow(Expr, i32),
    Recip(Expr, Option<Arc<Guard>>),
    Sin(Expr),
    Cos(Expr),
    Exp(Expr),
    /// `body` with `x_var` replaced by `scale * x_var + shift`
    Subst { var: usize, scale: Expr, shift: Expr, body: Expr },
    /// peak-one template at `(x_var - center) / radius`
    Bump { var: usize, center: f64, radius: f64 },
    /// primitive of the normalized template at `x_var / width`
    Hstep { var: usize, width: Expr },
    /// `order`-th derivative of the normalized template at `arg`
    Psi { order: u32, arg: Expr },
}

impl Node {
    /// Atoms that never vanish and carry no x dependence.
    pub(crate) fn is_x_free_atom(&self) -> bool {
        matches!(self, Node::EpsPow(_) | Node::LogInv)
    }
}

#[derive(Clone)]
pub struct Expr(pub(crate) Arc<Node>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self)
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Expr {
    pub(crate) fn from_node(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn ptr(&self) -> *const Node {
        Arc::as_ptr(&self.0)
    }

    pub fn var(i: usize) -> Self {
        Self::from_node(Node::Var(i))
    }

    pub fn constant(z: Complex64) -> Self {
        Self::from_node(Node::Const(z))
    }

    pub fn real(v: f64) -> Self {
        Self::constant(c(v, 0.0))
    }

    pub fn zero() -> Self {
        Self::real(0.0)
    }

    pub fn one() -> Self {
        Self::real(1.0)
    }

    pub fn imag_unit() -> Self {
        Self::constant(c(0.0, 1.0))
    }

    pub fn eps_pow(p: Rational64) -> Self {
        if p == Rational64::from_integer(0) {
            return Self::one();
        }
        Self::from_node(Node::EpsPow(p))
    }

    pub fn loginv() -> Self {
        Self::from_node(Node::LogInv)
    }

    pub fn net(n: Arc<NamedNet>) -> Self {
        Self::from_node(Node::Net(n))
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match *self.0 {
            Node::Const(z) => Some(z),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(c(0.0, 0.0))
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(c(1.0, 0.0))
    }

    /// Sum with flattening, constant folding and merging of terms that
    /// differ only by a constant factor.
    pub fn add(terms: Vec<Expr>) -> Self {
        let mut flat = Vec::with_capacity(terms.len());
        for t in terms {
            match &*t.0 {
                Node::Sum(inner) => flat.extend(inner.iter().cloned()),
                _ => flat.push(t),
            }
        }
        // (coefficient, non-constant part); None marks the constant slot
        let mut acc: Vec<(Complex64, Option<Expr>)> = Vec::new();
        // like terms share a fingerprint, so only a bucket is compared in full
        let mut buckets: HashMap<u64, Vec<usize>, BuildHasherDefault<Fnv>> = HashMap::default();
        let short = flat.len() <= 8;
        for t in flat {
            let (k, rest) = split_coefficient(&t);
            let key = if short { 0 } else { rest.as_ref().map_or(0, |r| r.fingerprint(1)) };
            let bucket = buckets.entry(key).or_default();
            match bucket.iter().find(|&&j| acc[j].1 == rest) {
                Some(&j) => acc[j].0 += k,
                None => {
                    bucket.push(acc.len());
                    acc.push((k, rest));
                }
            }
        }
        let mut out: Vec<Expr> = Vec::with_capacity(acc.len());
        for (k, rest) in acc {
            if k == c(0.0, 0.0) {
                continue;
            }
            out.push(match rest {
                None => Expr::constant(k),
                Some(r) if k == c(1.0, 0.0) => r,
                Some(r) => Expr::mul(vec![Expr::constant(k), r]),
            });
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Self::from_node(Node::Sum(out)),
        }
    }

    /// Product with flattening; constants fold into one leading coefficient.
    pub fn mul(factors: Vec<Expr>) -> Self {
        let mut k = c(1.0, 0.0);
        let mut out = Vec::with_capacity(factors.len());
        for f in factors {
            match &*f.0 {
                Node::Const(z) => k *= z,
                Node::Product(inner) => {
                    for g in inner {
                        match &*g.0 {
                            Node::Const(z) => k *= z,
                            _ => out.push(g.clone()),
                        }
                    }
                }
                _ => out.push(f),
            }
        }
        if k == c(0.0, 0.0) {
            return Expr::zero();
        }
        if out.is_empty() {
            return Expr::constant(k);
        }
        if k == c(1.0, 0.0) {
            if out.len() == 1 {
                return out.pop().unwrap();
            }
        } else {
            out.insert(0, Expr::constant(k));
        }
        Self::from_node(Node::Product(out))
    }

    pub fn scale(&self, k: Complex64) -> Self {
        Expr::mul(vec![Expr::constant(k), self.clone()])
    }

    pub fn add_const(&self, v: f64) -> Self {
        Expr::add(vec![self.clone(), Expr::real(v)])
    }

    pub fn neg(&self) -> Self {
        self.scale(c(-1.0, 0.0))
    }

    pub fn sub(&self, other: &Expr) -> Self {
        Expr::add(vec![self.clone(), other.neg()])
    }

    pub fn pow(&self, k: i32) -> Self {
        if k == 0 {
            return Expr::one();
        }
        if k == 1 {
            return self.clone();
        }
        match &*self.0 {
            Node::Const(z) if k > 0 || z.norm() > 0.0 => Expr::constant(z.powi(k)),
            Node::Pow(b, j) => b.pow(j * k),
            Node::EpsPow(p) => Expr::eps_pow(p * Rational64::from_integer(k as i64)),
            _ => Self::from_node(Node::Pow(self.clone(), k)),
        }
    }

    pub fn recip(&self) -> Self {
        match &*self.0 {
            Node::Const(z) if z.norm() > 0.0 => Expr::constant(z.inv()),
            Node::Recip(b, _) => b.clone(),
            Node::EpsPow(p) => Expr::eps_pow(-p),
            Node::LogInv => self.pow(-1),
            Node::Pow(b, k) if b.node().is_x_free_atom() => b.pow(-k),
            _ => Self::from_node(Node::Recip(self.clone(), None)),
        }
    }

    pub fn recip_guarded(&self, guard: Guard) -> Self {
        match &*self.0 {
            Node::Const(z) if z.norm() > 0.0 => Expr::constant(z.inv()),
            _ => Self::from_node(Node::Recip(self.clone(), Some(Arc::new(guard)))),
        }
    }

    pub fn div(&self, other: &Expr) -> Self {
        Expr::mul(vec![self.clone(), other.recip()])
    }

    pub fn sin(&self) -> Self {
        match self.as_const() {
            Some(z) => Expr::constant(z.sin()),
            None => Self::from_node(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Self {
        match self.as_const() {
            Some(z) => Expr::constant(z.cos()),
            None => Self::from_node(Node::Cos(self.clone())),
        }
    }

    pub fn exp(&self) -> Self {
        match self.as_const() {
            Some(z) => Expr::constant(z.exp()),
            None => Self::from_node(Node::Exp(self.clone())),
        }
    }

    pub fn subst(var: usize, scale: Expr, shift: Expr, body: Expr) -> Self {
        if scale.is_one() && shift.is_zero() {
            return body;
        }
        Self::from_node(Node::Subst { var, scale, shift, body })
    }

    pub fn bump(var: usize, center: f64, radius: f64) -> Self {
        Self::from_node(Node::Bump { var, center, radius })
    }

    pub fn hstep(var: usize, width: Expr) -> Self {
        Self::from_node(Node::Hstep { var, width })
    }

    pub fn psi(order: u32, arg: Expr) -> Self {
        Self::from_node(Node::Psi { order, arg })
    }

    /// True when some spatial variable occurs.
    pub fn depends_on_x(&self) -> bool {
        match &*self.0 {
            Node::Var(_) | Node::Bump { .. } | Node::Hstep { .. } => true,
            Node::Const(_) | Node::EpsPow(_) | Node::LogInv | Node::Net(_) => false,
            Node::Sum(v) | Node::Product(v) => v.iter().any(Expr::depends_on_x),
            Node::Pow(b, _) | Node::Recip(b, _) | Node::Sin(b) | Node::Cos(b) | Node::Exp(b) => {
                b.depends_on_x()
            }
            Node::Subst { body, .. } => body.depends_on_x(),
            Node::Psi { arg, .. } => arg.depends_on_x(),
        }
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        let mut m: Option<usize> = None;
        self.visit(&mut |n| {
            let v = match n {
                Node::Var(i) | Node::Bump { var: i, .. } | Node::Hstep { var: i, .. } | Node::Subst { var: i, .. } => {
                    Some(*i)
                }
                _ => None,
            };
            if let Some(v) = v {
                m = Some(m.map_or(v, |mm| mm.max(v)));
            }
        });
        m
    }

    /// Spatial variables the expression depends on.
    pub fn free_vars(&self) -> std::collections::BTreeSet<usize> {
        let mut s = std::collections::BTreeSet::new();
        self.visit(&mut |n| match n {
            Node::Var(i) | Node::Bump { var: i, .. } | Node::Hstep { var: i, .. } => {
                s.insert(*i);
            }
            _ => {}
        });
        s
    }

    /// Tree size (shared subtrees counted each time they occur).
    pub fn node_count(&self) -> usize {
        let mut k = 0;
        self.visit(&mut |_| k += 1);
        k
    }

    pub(crate) fn visit(&self, f: &mut impl FnMut(&Node)) {
        f(&self.0);
        match &*self.0 {
            Node::Sum(v) | Node::Product(v) => v.iter().for_each(|e| e.visit(f)),
            Node::Pow(b, _) | Node::Recip(b, _) | Node::Sin(b) | Node::Cos(b) | Node::Exp(b) => b.visit(f),
            Node::Subst { scale, shift, body, .. } => {
                scale.visit(f);
                shift.visit(f);
                body.visit(f);
            }
            Node::Hstep { width, .. } => width.visit(f),
            Node::Psi { arg, .. } => arg.visit(f),
            _ => {}
        }
    }

    /// Attach `guard` to every reciprocal that has none.
    pub fn with_guard(&self, guard: &Guard) -> Expr {
        let g = Arc::new(guard.clone());
        self.map_recips(&g)
    }

    fn map_recips(&self, g: &Arc<Guard>) -> Expr {
        let m = |e: &Expr| e.map_recips(g);
        let node = match &*self.0 {
            Node::Recip(b, None) => Node::Recip(m(b), Some(g.clone())),
            Node::Recip(b, Some(h)) => Node::Recip(m(b), Some(h.clone())),
            Node::Sum(v) => Node::Sum(v.iter().map(m).collect()),
            Node::Product(v) => Node::Product(v.iter().map(m).collect()),
            Node::Pow(b, k) => Node::Pow(m(b), *k),
            Node::Sin(b) => Node::Sin(m(b)),
            Node::Cos(b) => Node::Cos(m(b)),
            Node::Exp(b) => Node::Exp(m(b)),
            Node::Subst { var, scale, shift, body } => {
                Node::Subst { var: *var, scale: m(scale), shift: m(shift), body: m(body) }
            }
            Node::Hstep { var, width } => Node::Hstep { var: *var, width: m(width) },
            Node::Psi { order, arg } => Node::Psi { order: *order, arg: m(arg) },
            _ => return self.clone(),
        };
        Expr::from_node(node)
    }
}

/// 64-bit FNV-1a; the std hasher is needlessly strong for fingerprints.
struct Fnv(u64);

impl Default for Fnv {
    fn default() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
}

impl Hasher for Fnv {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 = (self.0 ^ *b as u64).wrapping_mul(0x100_0000_01b3);
        }
    }
}

fn hash_complex(z: &Complex64, h: &mut Fnv) {
    // `+ 0.0` maps -0.0 to 0.0, which compare equal
    (z.re + 0.0).to_bits().hash(h);
    (z.im + 0.0).to_bits().hash(h);
}

impl Expr {
    /// Structural hash down to `depth` levels and over the first few operands; equal
    /// expressions agree.
    pub(crate) fn fingerprint(&self, depth: u32) -> u64 {
        let mut h = Fnv::default();
        self.hash_into(depth, &mut h);
        h.finish()
    }

    fn hash_into(&self, depth: u32, h: &mut Fnv) {
        let node = &*self.0;
        std::mem::discriminant(node).hash(h);
        if depth == 0 {
            return;
        }
        let sub = |e: &Expr, h: &mut Fnv| e.hash_into(depth - 1, h);
        match node {
            Node::Var(j) => j.hash(h),
            Node::Const(z) => hash_complex(z, h),
            Node::EpsPow(r) => r.hash(h),
            Node::LogInv => {}
            Node::Net(n) => n.name.hash(h),
            Node::Sum(v) | Node::Product(v) => {
                v.len().hash(h);
                v.iter().for_each(|e| sub(e, h));
            }
            Node::Pow(b, k) => {
                k.hash(h);
                sub(b, h);
            }
            Node::Recip(b, _) | Node::Sin(b) | Node::Cos(b) | Node::Exp(b) => sub(b, h),
            Node::Subst { var, scale, shift, body } => {
                var.hash(h);
                sub(scale, h);
                sub(shift, h);
                sub(body, h);
            }
            Node::Bump { var, center, radius } => {
                var.hash(h);
                (center + 0.0).to_bits().hash(h);
                (radius + 0.0).to_bits().hash(h);
            }
            Node::Hstep { var, width } => {
                var.hash(h);
                sub(width, h);
            }
            Node::Psi { order, arg } => {
                order.hash(h);
                sub(arg, h);
            }
        }
    }
}

fn split_coefficient(t: &Expr) -> (Complex64, Option<Expr>) {
    match &*t.0 {
        Node::Const(z) => (*z, None),
        Node::Product(v) => match &*v[0].0 {
            Node::Const(z) => {
                let rest = if v.len() == 2 { v[1].clone() } else { Expr::from_node(Node::Product(v[1..].to_vec())) };
                (*z, Some(rest))
            }
            _ => (c(1.0, 0.0), Some(t.clone())),
        },
        _ => (c(1.0, 0.0), Some(t.clone())),
    }
}

impl std::ops::Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        Expr::add(vec![self.clone(), rhs.clone()])
    }
}

impl std::ops::Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        Expr::sub(self, rhs)
    }
}

impl std::ops::Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Expr::mul(vec![self.clone(), rhs.clone()])
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplification_rules() {
        let x = Expr::var(0);
        assert!(Expr::mul(vec![Expr::zero(), x.clone()]).is_zero());
        assert_eq!(Expr::add(vec![x.clone(), Expr::zero()]), x);
        assert!(Expr::sub(&x, &x).is_zero());
        let two_x = Expr::add(vec![x.clone(), x.clone()]);
        assert_eq!(two_x, Expr::mul(vec![Expr::real(2.0), x.clone()]));
        assert_eq!(x.pow(1), x);
        assert!(x.pow(0).is_one());
        assert_eq!(x.recip().recip(), x);
    }
}
