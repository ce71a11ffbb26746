use num_complex::Complex64;
use symbols::{library, MultiIndex, SymbolFamily};
use symexpr::{parse, quad::Composite, Expr};

fn sym(n: usize, terms: &[(&[u32], &str)]) -> SymbolFamily {
    SymbolFamily::from_terms(n, terms.iter().map(|(a, s)| (a.to_vec(), parse(s, n).unwrap())).collect()).unwrap()
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
    fn range(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.next()
    }
}

/// `∫ (P u) v` and `∫ u (ᵗP v)` by tensor Gauss-Legendre over [-1, 1]^n.
fn pairings(p: &SymbolFamily, u: &Expr, v: &Expr, eps: f64) -> (Complex64, Complex64, f64) {
    let t = p.transpose();
    let pu = p.apply(u);
    let tv = t.apply(v);
    let n = p.dim();
    // sharp slow-scale steps need finer panels; the 2-D coefficients are mild
    let rule = Composite::new(-1.0, 1.0, if n == 1 { 400 } else { 48 }, 10);
    let (mut lhs, mut rhs, mut scale) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), 0.0);
    let pts: Vec<(f64, f64)> = rule.points.iter().copied().zip(rule.weights.iter().copied()).collect();
    let mut visit = |x: &[f64], w: f64| {
        let a = pu.eval(x, eps).unwrap() * v.eval(x, eps).unwrap();
        let b = u.eval(x, eps).unwrap() * tv.eval(x, eps).unwrap();
        lhs += a * w;
        rhs += b * w;
        scale += (a.norm() + b.norm()) * w;
    };
    if n == 1 {
        for &(x, w) in &pts {
            visit(&[x], w);
        }
    } else {
        for &(x, wx) in &pts {
            for &(y, wy) in &pts {
                visit(&[x, y], wx * wy);
            }
        }
    }
    (lhs, rhs, scale)
}

fn test_pair(n: usize) -> (Expr, Expr) {
    if n == 1 {
        (
            parse("bump(x1; 0.1; 0.8) * exp(0.7 * i * x1) * (1 + x1)", 1).unwrap(),
            parse("bump(x1; -0.1; 0.85) * cos(2 * x1)", 1).unwrap(),
        )
    } else {
        (
            parse("bump(x1; 0.1; 0.8) * bump(x2; 0; 0.9) * exp(0.7 * i * x1 - 0.3 * i * x2) * (1 + x2)", 2).unwrap(),
            parse("bump(x1; -0.1; 0.85) * bump(x2; 0.05; 0.8) * cos(2 * x1 + x2)", 2).unwrap(),
        )
    }
}

fn operators() -> Vec<(&'static str, SymbolFamily)> {
    vec![
        ("a(x) xi", sym(1, &[(&[1], "2 + sin(x1)")])),
        ("variable second order", sym(1, &[(&[2], "1 + x1^2"), (&[1], "x1 * eps^(1/2)"), (&[0], "3")])),
        ("first-order slow scale", library::first_order_demo()),
        ("heat", library::heat2d()),
        ("acoustic", library::acoustic()),
    ]
}

#[test]
fn integration_by_parts_identity() {
    for (name, p) in operators() {
        let (u, v) = test_pair(p.dim());
        for &eps in &[0.5, 2f64.powi(-10), 2f64.powi(-30)] {
            let (lhs, rhs, scale) = pairings(&p, &u, &v, eps);
            let rel = (lhs - rhs).norm() / scale;
            assert!(rel <= 1e-8, "{name} at eps {eps}: {lhs} vs {rhs} (rel {rel:e})");
        }
    }
}

#[test]
fn printed_convention_fails_the_oracle() {
    // transpose with a plain ∂_x in the x-slot: -a xi - a'
    let p = sym(1, &[(&[1], "2 + sin(x1)")]);
    let wrong = sym(1, &[(&[1], "-2 - sin(x1)"), (&[0], "-cos(x1)")]);
    let (u, v) = test_pair(1);
    let rule = Composite::new(-1.0, 1.0, 48, 10);
    let lhs = rule.integrate(|x| p.apply(&u).eval(&[x], 0.5).unwrap() * v.eval(&[x], 0.5).unwrap());
    let rhs = rule.integrate(|x| u.eval(&[x], 0.5).unwrap() * wrong.apply(&v).eval(&[x], 0.5).unwrap());
    assert!((lhs - rhs).norm() > 1e-3);
    assert_eq!(p.transpose(), sym(1, &[(&[1], "-(2 + sin(x1))"), (&[0], "i * cos(x1)")]));
}

#[test]
fn transpose_is_an_involution() {
    let mut rng = Lcg(7);
    for (name, p) in operators() {
        let tt = p.transpose().transpose();
        for _ in 0..100 {
            let x: Vec<f64> = (0..p.dim()).map(|_| rng.range(-1.2, 1.2)).collect();
            let xi: Vec<f64> = (0..p.dim()).map(|_| rng.range(-20.0, 20.0)).collect();
            let eps = 2f64.powf(-rng.range(1.0, 40.0));
            let a = p.eval(&x, &xi, eps).unwrap();
            let b = tt.eval(&x, &xi, eps).unwrap();
            assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0), "{name}: {a} vs {b}");
        }
    }
}

#[test]
fn modulated_application_matches_direct_expansion() {
    let mut rng = Lcg(11);
    let g1 = parse("bump(x1; 0; 1.2) * (1 + x1 + x1^2)", 1).unwrap();
    let g2 = parse("bump(x1; 0; 1.2) * sin(x2 + 0.3) * exp(x1 / 2)", 2).unwrap();
    for (name, p) in operators() {
        let g = if p.dim() == 1 { &g1 } else { &g2 };
        for _ in 0..10 {
            let xi: Vec<f64> = (0..p.dim()).map(|_| rng.range(-8.0, 8.0)).collect();
            let h = p.apply_to_modulated(g, &xi);
            // e^{-i xi x} as an expression, then P(x, D) applied symbolically
            let phase = Expr::add((0..p.dim()).map(|j| Expr::var(j).scale(Complex64::new(0.0, -xi[j]))).collect()).exp();
            let direct = p.apply(&Expr::mul(vec![g.clone(), phase]));
            for _ in 0..10 {
                let x: Vec<f64> = (0..p.dim()).map(|_| rng.range(-1.1, 1.1)).collect();
                let eps = 2f64.powf(-rng.range(1.0, 30.0));
                let ph = Complex64::new(0.0, -xi.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()).exp();
                let lhs = h.eval(&x, eps).unwrap() * ph;
                let rhs = direct.eval(&x, eps).unwrap();
                assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1.0), "{name}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn second_derivative_modulated_example() {
    let d2 = sym(1, &[(&[2], "1")]);
    let g = parse("exp(x1) * cos(3 * x1)", 1).unwrap();
    let xi = 2.5;
    let h = d2.apply_to_modulated(&g, &[xi]);
    let mi = Complex64::new(0.0, -1.0);
    let want = Expr::add(vec![
        g.scale(Complex64::new(xi * xi, 0.0)),
        g.diff(0).scale(mi * (-2.0 * xi)),
        g.diff(0).diff(0).scale(mi * mi),
    ]);
    for k in 0..20 {
        let x = -1.0 + k as f64 * 0.1;
        let a = h.eval(&[x], 0.5).unwrap();
        let b = want.eval(&[x], 0.5).unwrap();
        assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0));
    }
}

#[test]
fn xi_derivative_matches_finite_differences() {
    let p = sym(1, &[(&[3], "1")]);
    let d = p.deriv(&MultiIndex(vec![0]), &MultiIndex(vec![2]));
    assert_eq!(d, sym(1, &[(&[1], "6")]));
    let mut rng = Lcg(3);
    let h = 1e-3;
    for _ in 0..20 {
        let xi = rng.range(-5.0, 5.0);
        let f = |s: f64| p.eval(&[0.0], &[s], 0.5).unwrap().re;
        let fd = (f(xi + h) - 2.0 * f(xi) + f(xi - h)) / (h * h);
        let got = d.eval(&[0.0], &[xi], 0.5).unwrap().re;
        assert!((got - fd).abs() <= 1e-6 * got.abs().max(1.0), "{got} vs {fd}");
    }
}

#[test]
fn acoustic_principal_part_and_constant_case() {
    let pp = library::acoustic().principal_part();
    let want = library::acoustic_from(&library::acoustic_speed(), &Expr::one());
    assert_eq!(pp, want);
    let flat = library::acoustic_from(&Expr::one(), &Expr::one());
    assert_eq!(flat.eval(&[0.2, 0.1], &[1.0, 1.0], 0.1).unwrap(), Complex64::new(0.0, 0.0));
    let first = sym(2, &[(&[1, 0], "x1"), (&[0, 1], "2"), (&[0, 0], "5")]);
    assert_eq!(first.principal_part(), sym(2, &[(&[1, 0], "x1"), (&[0, 1], "2")]));
}
