use std::collections::BTreeMap;

use num_complex::Complex64;
use symexpr::{EvalError, Expr};

use crate::{MultiIndex, SymbolError};

/// `P(x, xi) = sum_alpha a_alpha(x) xi^alpha` with expression coefficients.
///
/// The empty family is the zero symbol (degree 0).
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolFamily {
    n: usize,
    m: u32,
    coeffs: BTreeMap<MultiIndex, Expr>,
}

/// Coefficient values at one `(x, eps)`; the polynomial in `xi` is then cheap.
#[derive(Clone, Debug)]
pub struct CoefficientValues {
    terms: Vec<(MultiIndex, Complex64)>,
}

impl CoefficientValues {
    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        self.terms.iter().map(|(a, v)| v * a.monomial(xi)).sum()
    }

    pub fn terms(&self) -> &[(MultiIndex, Complex64)] {
        &self.terms
    }
}

fn i_pow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// `(-i)^k`, the factor turning `∂^k` into `D^k`.
pub fn minus_i_pow(k: u32) -> Complex64 {
    i_pow(k).conj()
}

impl SymbolFamily {
    /// Drops structurally zero coefficients and sets the degree.
    pub fn new(n: usize, coeffs: BTreeMap<MultiIndex, Expr>) -> Result<Self, SymbolError> {
        if n == 0 {
            return Err(SymbolError::Dimension { expected: 1, got: 0 });
        }
        let mut kept = BTreeMap::new();
        for (a, e) in coeffs {
            if a.dim() != n {
                return Err(SymbolError::Dimension { expected: n, got: a.dim() });
            }
            if let Some(v) = e.max_var() {
                if v >= n {
                    return Err(SymbolError::Variable { index: v + 1, n });
                }
            }
            if !e.is_zero() {
                kept.insert(a, e);
            }
        }
        let m = kept.keys().map(MultiIndex::order).max().unwrap_or(0);
        Ok(SymbolFamily { n, m, coeffs: kept })
    }

    pub fn from_terms(n: usize, terms: Vec<(Vec<u32>, Expr)>) -> Result<Self, SymbolError> {
        let mut map: BTreeMap<MultiIndex, Expr> = BTreeMap::new();
        for (a, e) in terms {
            let a = MultiIndex(a);
            let merged = match map.remove(&a) {
                Some(prev) => Expr::add(vec![prev, e]),
                None => e,
            };
            map.insert(a, merged);
        }
        Self::new(n, map)
    }

    pub fn zero(n: usize) -> Self {
        SymbolFamily { n, m: 0, coeffs: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn coeffs(&self) -> &BTreeMap<MultiIndex, Expr> {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Option<&Expr> {
        self.coeffs.get(alpha)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coefficient_values(&self, x: &[f64], eps: f64) -> Result<CoefficientValues, EvalError> {
        let mut terms = Vec::with_capacity(self.coeffs.len());
        for (a, e) in &self.coeffs {
            terms.push((a.clone(), e.eval(x, eps)?));
        }
        Ok(CoefficientValues { terms })
    }

    pub fn eval(&self, x: &[f64], xi: &[f64], eps: f64) -> Result<Complex64, EvalError> {
        Ok(self.coefficient_values(x, eps)?.eval(xi))
    }

    /// Symbol of `∂_x^alpha ∂_xi^beta P`.
    pub fn deriv(&self, alpha: &MultiIndex, beta: &MultiIndex) -> SymbolFamily {
        let mut out = BTreeMap::new();
        for (a, e) in &self.coeffs {
            if !beta.le(a) {
                continue;
            }
            let c = a.falling(beta);
            let d = e.diff_multi(&alpha.0);
            if d.is_zero() {
                continue;
            }
            out.insert(a.minus(beta), d.scale(Complex64::new(c, 0.0)));
        }
        SymbolFamily::new(self.n, out).expect("derivative keeps the dimension")
    }

    /// Terms of order exactly `m`.
    pub fn principal_part(&self) -> SymbolFamily {
        let coeffs = self.coeffs.iter().filter(|(a, _)| a.order() == self.m).map(|(a, e)| (a.clone(), e.clone())).collect();
        SymbolFamily::new(self.n, coeffs).expect("subset of a valid family")
    }

    pub fn scale(&self, k: Complex64) -> SymbolFamily {
        let coeffs = self.coeffs.iter().map(|(a, e)| (a.clone(), e.scale(k))).collect();
        SymbolFamily::new(self.n, coeffs).expect("same dimension")
    }

    /// `xi -> -xi` on the polynomial part: flips the sign of odd-order terms.
    pub fn reflect(&self) -> SymbolFamily {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(a, e)| (a.clone(), if a.order() % 2 == 1 { e.neg() } else { e.clone() }))
            .collect();
        SymbolFamily::new(self.n, coeffs).expect("same dimension")
    }

    /// Symbol of the formal transpose, `∫ (Pu) v = ∫ u (ᵗP v)`:
    /// `ᵗP(x, eta) = sum_sigma (-1)^|sigma| / sigma! ∂_xi^sigma D_x^sigma P (x, -eta)`.
    ///
    /// The x-slot carries `D_x = -i ∂_x`; with a plain `∂_x` the pairing
    /// identity fails already for `a(x) xi`.
    pub fn transpose(&self) -> SymbolFamily {
        let mut acc: BTreeMap<MultiIndex, Vec<Expr>> = BTreeMap::new();
        for sigma in MultiIndex::up_to(self.n, self.m) {
            let s = sigma.order();
            // (-1)^s (-i)^s = i^s
            let k = i_pow(s) / sigma.factorial();
            let d = self.deriv(&sigma, &sigma);
            for (g, e) in d.coeffs {
                acc.entry(g).or_default().push(e.scale(k));
            }
        }
        let coeffs = acc.into_iter().map(|(g, v)| (g, Expr::add(v))).collect();
        SymbolFamily::new(self.n, coeffs).expect("same dimension").reflect()
    }

    /// `P(x, D) u = sum_alpha a_alpha(x) D^alpha u` as an expression.
    pub fn apply(&self, u: &Expr) -> Expr {
        let terms = self
            .coeffs
            .iter()
            .map(|(a, e)| Expr::mul(vec![e.clone(), u.diff_multi(&a.0).scale(minus_i_pow(a.order()))]))
            .collect();
        Expr::add(terms)
    }

    /// Coefficients evaluated into the polynomial at a fixed `xi`: `P(x, xi)` as an expression.
    pub fn at_xi(&self, xi: &[f64]) -> Expr {
        let terms =
            self.coeffs.iter().map(|(a, e)| e.scale(Complex64::new(a.monomial(xi), 0.0))).collect();
        Expr::add(terms)
    }

    /// `h` with `P(x, D)(g e^{-i xi x}) = e^{-i xi x} h`:
    /// `h = sum_beta (1/beta!) (∂_xi^beta P)(x, -xi) D_x^beta g`.
    pub fn apply_to_modulated(&self, g: &Expr, xi: &[f64]) -> Expr {
        let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
        let zero = MultiIndex::zero(self.n);
        let mut terms = Vec::new();
        // each D^beta g is one derivative of a lower one already computed
        let mut dgs: BTreeMap<Vec<u32>, Expr> = BTreeMap::new();
        dgs.insert(zero.0.clone(), g.clone());
        for beta in MultiIndex::up_to(self.n, self.m) {
            let p = self.deriv(&zero, &beta).at_xi(&neg);
            if p.is_zero() {
                continue;
            }
            let dg = derivative(&beta.0, &mut dgs);
            if dg.is_zero() {
                continue;
            }
            let k = minus_i_pow(beta.order()) / beta.factorial();
            terms.push(Expr::mul(vec![Expr::constant(k), p, dg]));
        }
        Expr::add(terms)
    }

    /// Attach a guard to every reciprocal in the coefficients.
    pub fn with_guard(&self, guard: &symexpr::Guard) -> SymbolFamily {
        let coeffs = self.coeffs.iter().map(|(a, e)| (a.clone(), e.with_guard(guard))).collect();
        SymbolFamily::new(self.n, coeffs).expect("same dimension")
    }

    /// Sum of `|a_alpha|` over `|alpha| = m`.
    pub fn principal_weight(&self, x: &[f64], eps: f64) -> Result<f64, EvalError> {
        let mut b = 0.0;
        for (a, e) in &self.coeffs {
            if a.order() == self.m {
                b += e.eval(x, eps)?.norm();
            }
        }
        Ok(b)
    }
}

fn derivative(beta: &[u32], dgs: &mut BTreeMap<Vec<u32>, Expr>) -> Expr {
    if let Some(e) = dgs.get(beta) {
        return e.clone();
    }
    let i = beta.iter().rposition(|&k| k > 0).expect("zero index is seeded");
    let mut lower = beta.to_vec();
    lower[i] -= 1;
    let e = derivative(&lower, dgs).diff(i);
    dgs.insert(beta.to_vec(), e.clone());
    e
}

impl std::ops::Add for &SymbolFamily {
    type Output = SymbolFamily;
    fn add(self, rhs: &SymbolFamily) -> SymbolFamily {
        let mut map = self.coeffs.clone();
        for (a, e) in &rhs.coeffs {
            let merged = match map.remove(a) {
                Some(prev) => Expr::add(vec![prev, e.clone()]),
                None => e.clone(),
            };
            map.insert(a.clone(), merged);
        }
        SymbolFamily::new(self.n.max(rhs.n), map).expect("matching dimensions")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use symexpr::parse;

    fn sym(n: usize, terms: &[(&[u32], &str)]) -> SymbolFamily {
        SymbolFamily::from_terms(n, terms.iter().map(|(a, s)| (a.to_vec(), parse(s, n).unwrap())).collect())
            .unwrap()
    }

    #[test]
    fn basic_examples() {
        let p = sym(1, &[(&[2], "1"), (&[0], "1")]);
        assert_eq!(p.eval(&[0.0], &[2.0], 0.5).unwrap(), Complex64::new(5.0, 0.0));
        let ax = sym(1, &[(&[1], "x1")]);
        assert_eq!(ax.eval(&[2.0], &[3.0], 0.5).unwrap(), Complex64::new(6.0, 0.0));
        let d = p.deriv(&MultiIndex(vec![0]), &MultiIndex(vec![1]));
        assert_eq!(d, sym(1, &[(&[1], "2")]));
        assert_eq!(p.principal_part(), sym(1, &[(&[2], "1")]));
        assert!(p.deriv(&MultiIndex(vec![0]), &MultiIndex(vec![3])).is_zero());
        let a2 = sym(1, &[(&[1], "x1^2")]);
        assert_eq!(a2.deriv(&MultiIndex(vec![1]), &MultiIndex(vec![0])), sym(1, &[(&[1], "2 * x1")]));
    }

    #[test]
    fn transpose_examples() {
        let p = sym(1, &[(&[2], "1")]);
        assert_eq!(p.transpose(), p);
        let ax = sym(1, &[(&[1], "sin(x1)")]);
        let t = ax.transpose();
        assert_eq!(t, sym(1, &[(&[1], "-sin(x1)"), (&[0], "i * cos(x1)")]));
    }

    #[test]
    fn modulated_examples() {
        let d = sym(1, &[(&[1], "1")]);
        let h = d.apply_to_modulated(&Expr::one(), &[3.0]);
        assert_eq!(h, Expr::real(-3.0));
    }
}
