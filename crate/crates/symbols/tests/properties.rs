use num_complex::Complex64;
use proptest::prelude::*;
use symbols::{MultiIndex, SymbolFamily};
use symexpr::{parse, Expr};

fn complex() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| Complex64::new(a, b))
}

fn constant_symbol(n: usize, m: u32) -> impl Strategy<Value = SymbolFamily> {
    let idx = MultiIndex::up_to(n, m);
    prop::collection::vec(complex(), idx.len()).prop_map(move |cs| {
        SymbolFamily::from_terms(n, idx.iter().zip(cs).map(|(a, c)| (a.0.clone(), Expr::constant(c))).collect()).unwrap()
    })
}

proptest! {
    #[test]
    fn constant_transpose_flips_odd_orders(p in constant_symbol(2, 3)) {
        prop_assert_eq!(p.transpose(), p.reflect());
    }

    #[test]
    fn polynomial_exact_in_xi(cs in prop::collection::vec(complex(), 4), x in -1.0f64..1.0) {
        // recover each coefficient of a cubic from four interpolation nodes
        let a = parse("1 + x1^2", 1).unwrap();
        let p = SymbolFamily::from_terms(
            1,
            cs.iter().enumerate().map(|(k, c)| (vec![k as u32], a.scale(*c))).collect(),
        ).unwrap();
        let nodes = [-1.5, -0.5, 0.5, 1.5];
        let vals: Vec<Complex64> = nodes.iter().map(|&s| p.eval(&[x], &[s], 0.3).unwrap()).collect();
        // Newton divided differences, then expand to monomial form
        let mut dd = vals.clone();
        for j in 1..4 {
            for i in (j..4).rev() {
                dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - j]);
            }
        }
        let mut poly = vec![Complex64::new(0.0, 0.0); 4];
        for i in (0..4).rev() {
            // poly = poly * (s - nodes[i]) + dd[i]
            let mut next = vec![Complex64::new(0.0, 0.0); 4];
            for k in 0..4 {
                if k + 1 < 4 {
                    next[k + 1] += poly[k];
                }
                next[k] -= poly[k] * nodes[i];
            }
            next[0] += dd[i];
            poly = next;
        }
        let av = 1.0 + x * x;
        for k in 0..4 {
            prop_assert!((poly[k] - cs[k] * av).norm() <= 1e-10 * (1.0 + cs[k].norm() * av));
        }
    }

    #[test]
    fn eval_is_linear_in_coefficients(c1 in complex(), c2 in complex(), xi in -5.0f64..5.0, x in -1.0f64..1.0) {
        let p = SymbolFamily::from_terms(1, vec![(vec![2], parse("sin(x1)", 1).unwrap()), (vec![0], Expr::constant(c1))]).unwrap();
        let q = SymbolFamily::from_terms(1, vec![(vec![1], parse("x1", 1).unwrap()), (vec![0], Expr::constant(c2))]).unwrap();
        let s = &p + &q;
        let lhs = s.eval(&[x], &[xi], 0.5).unwrap();
        let rhs = p.eval(&[x], &[xi], 0.5).unwrap() + q.eval(&[x], &[xi], 0.5).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn modulated_one_is_reflected_symbol(p in constant_symbol(1, 3), xi in -10.0f64..10.0) {
        let h = p.apply_to_modulated(&Expr::one(), &[xi]);
        let want = p.eval(&[0.0], &[-xi], 0.5).unwrap();
        let got = h.eval(&[0.0], 0.5).unwrap();
        prop_assert!((got - want).norm() <= 1e-12 * (1.0 + want.norm()));
    }
}
