use adjoint::{apply_remainder, build_adjoint_solution, build_remainder, power_slope, sup_series, GuardRegion, RationalSymbol};
use num_complex::Complex64;
use proptest::prelude::*;
use symbols::SymbolFamily;
use symexpr::{parse, Expr};

fn guard() -> GuardRegion {
    GuardRegion::new(vec![-1.0], vec![1.0], 2.0)
}

/// Variable-coefficient operators with `|P| > 0` for `|xi| >= 2`.
fn operator() -> impl Strategy<Value = SymbolFamily> {
    (0.5f64..2.0, -0.5f64..0.5, 0.1f64..1.0, 0usize..3).prop_map(|(a, b, k, shape)| {
        let terms = match shape {
            0 => vec![(vec![1], parse(&format!("{a} + 0.3 * sin({k} * x1)"), 1).unwrap()), (vec![0], parse(&format!("{b} * x1 + i"), 1).unwrap())],
            1 => vec![
                (vec![2], parse(&format!("{a} + x1^2 * eps^(1/2)"), 1).unwrap()),
                (vec![1], parse(&format!("{b} * cos(x1)"), 1).unwrap()),
                (vec![0], Expr::one()),
            ],
            _ => vec![(vec![2], Expr::real(a)), (vec![1], Expr::real(b)), (vec![0], Expr::real(1.0 + k))],
        };
        SymbolFamily::from_terms(1, terms).unwrap()
    })
}

fn phi() -> Expr {
    parse("bump(x1; 0.1; 0.7) * (1 + x1 / 2)", 1).unwrap()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

fn point() -> impl Strategy<Value = (f64, f64, f64)> {
    (-1.0f64..1.0, prop_oneof![-60.0f64..-3.0, 3.0f64..60.0], 1.0f64..30.0).prop_map(|(x, xi, j)| (x, xi, 2f64.powf(-j)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn telescoping(p in operator(), (x, xi, eps) in point(), n in 1usize..4) {
        let sol = build_adjoint_solution(&p, &phi(), n, guard()).unwrap();
        for k in 1..=n {
            let wk = sol.powers[..k].iter().fold(RationalSymbol::zero(&sol.remainder.base), |a, b| a.add(b));
            let lhs = wk.sub(&apply_remainder(&sol.remainder, &wk)).eval(&[x], &[xi], eps).unwrap();
            let rhs = sol.phi.eval(&[x], eps).unwrap() - sol.powers[k].eval(&[x], &[xi], eps).unwrap();
            prop_assert!(rel(lhs, rhs) <= 1e-10, "k = {k}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn support_invariance(p in operator(), xi in 3.0f64..60.0, x in prop_oneof![-1.0f64..-0.6, 0.8f64..1.0], n in 1usize..4) {
        let sol = build_adjoint_solution(&p, &phi(), n, guard()).unwrap();
        let zero = Complex64::new(0.0, 0.0);
        prop_assert_eq!(sol.psi.eval(&[x], &[xi], 0.1).unwrap(), zero);
        prop_assert_eq!(sol.w.eval(&[x], &[xi], 0.1).unwrap(), zero);
        prop_assert_eq!(sol.residual.eval(&[x], &[xi], 0.1).unwrap(), zero);
    }

    #[test]
    fn linearity(p in operator(), (x, xi, eps) in point(), k in -2.0f64..2.0) {
        let r = build_remainder(&p, guard()).unwrap();
        let g = RationalSymbol::from_expr(&r.base, phi());
        let h = RationalSymbol::from_expr(&r.base, parse("bump(x1; -0.2; 0.6) * sin(3 * x1)", 1).unwrap()).scale(Complex64::new(k, 0.5));
        let lhs = apply_remainder(&r, &g.add(&h)).eval(&[x], &[xi], eps).unwrap();
        let rhs = apply_remainder(&r, &g).eval(&[x], &[xi], eps).unwrap() + apply_remainder(&r, &h).eval(&[x], &[xi], eps).unwrap();
        prop_assert!(rel(lhs, rhs) <= 1e-12);
    }

    #[test]
    fn derivatives_match_central_differences(p in operator(), (_, xi, eps) in point(), x in -0.4f64..0.6) {
        // away from the support edge, where relative derivatives of the bump blow up
        let sol = build_adjoint_solution(&p, &phi(), 2, guard()).unwrap();
        let f = &sol.psi;
        // fourth-order central stencil
        let cd = |g: &dyn Fn(f64) -> Complex64, h: f64| (g(-2.0 * h) - g(2.0 * h) + 8.0 * (g(h) - g(-h))) / (12.0 * h);
        let h = 1e-4;
        let dx = f.diff_x(0).eval(&[x], &[xi], eps).unwrap();
        let fdx = cd(&|t| f.eval(&[x + t], &[xi], eps).unwrap(), h);
        let dxi = f.diff_xi(0).eval(&[x], &[xi], eps).unwrap();
        let fdxi = cd(&|t| f.eval(&[x], &[xi + t], eps).unwrap(), h * xi.abs());
        // scale by the size of the function itself near x
        let s = f.eval(&[x], &[xi], eps).unwrap().norm() + dx.norm() * 1e-2;
        prop_assert!((dx - fdx).norm() <= 1e-6 * dx.norm().max(s).max(1e-12), "{dx} vs {fdx}");
        prop_assert!((dxi - fdxi).norm() <= 1e-6 * dxi.norm().max(s / xi.abs()).max(1e-12), "{dxi} vs {fdxi}");
    }

    #[test]
    fn constant_elliptic_powers_decay_at_rate_n(a in 0.5f64..2.0, b in -1.0f64..1.0, c in 0.5f64..2.0, n in 1usize..4) {
        let p = SymbolFamily::from_terms(1, vec![(vec![2], Expr::real(a)), (vec![1], Expr::real(b)), (vec![0], Expr::real(c))]).unwrap();
        // the Gevrey-type growth of bump derivatives delays the asymptotic regime by the
        // inverse support width, hence the wide cutoff
        let wide = parse("bump(x1; 0; 4)", 1).unwrap();
        let g = GuardRegion::new(vec![-4.0], vec![4.0], 2.0);
        let sol = build_adjoint_solution(&p, &wide, n, g).unwrap();
        let xs: Vec<Vec<f64>> = (0..257).map(|k| vec![-4.0 + k as f64 / 32.0]).collect();
        let radii: Vec<f64> = (0..16).map(|k| 10f64 * 100f64.powf(k as f64 / 15.0)).collect();
        for dir in [1.0, -1.0] {
            let sup: Vec<f64> = sup_series(&sol.residual, &xs, &[vec![dir]], &radii, 0.1).unwrap().iter().map(|t| t.0).collect();
            let slope = power_slope(&radii, &sup);
            prop_assert!((slope + n as f64).abs() <= 0.2, "slope {slope} for N = {n}");
        }
    }
}
